"""Provider and consumer data-space connectors.

The provider connector owns the catalog (publication, negotiation,
transfer); the consumer connector re-verifies everything it pulls off
the wire before any of it reaches the decision logic. Assets whose
claims or attestations fail verification are surfaced flagged rather
than hidden, so a consumer can see exactly what is wrong.

Negotiation is a four-state machine: REQUESTED -> AGREED -> FINALIZED,
with TERMINATED reachable from REQUESTED and AGREED. FINALIZED and
TERMINATED are absorbing. Payload bytes are only ever released for a
FINALIZED session.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

from .envelope import (
    KeyDirectory,
    KeyPair,
    SignatureEnvelope,
    content_hash,
    derived_id,
    hash_of,
    sign_payload,
    verify_payload,
)
from .errors import (
    DuplicateAssetId,
    HashMismatch,
    IllegalTransition,
    IntegrityFailure,
    InvalidClaim,
    MalformedCatalog,
    NoSuchAgreement,
    NotFinalized,
    UnknownSession,
)
from .model import AssuranceLevel, Attestation, TrustClaim, effective_level

PERMITTED_ACTIONS = frozenset({"use", "distribute"})


@dataclass(frozen=True)
class Permission:
    action: str
    constraint: Optional[str] = None

    def __post_init__(self):
        if self.action not in PERMITTED_ACTIONS:
            raise ValueError(f"unknown policy action {self.action!r}")

    def to_dict(self) -> dict:
        return {"action": self.action, "constraint": self.constraint}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Permission":
        return cls(action=data["action"], constraint=data.get("constraint"))


@dataclass(frozen=True)
class Policy:
    """Usage policy attached to an asset; at least one permission."""

    policy_id: str
    permissions: tuple[Permission, ...]

    def __post_init__(self):
        object.__setattr__(self, "permissions", tuple(self.permissions))
        if not self.permissions:
            raise ValueError("policy requires at least one permission")

    def to_dict(self) -> dict:
        return {
            "policy_id": self.policy_id,
            "permissions": [p.to_dict() for p in self.permissions],
        }

    def canonical_hash(self) -> str:
        return hash_of(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> "Policy":
        return cls(
            policy_id=data["policy_id"],
            permissions=tuple(Permission.from_dict(p) for p in data["permissions"]),
        )


def default_policy() -> Policy:
    return Policy(policy_id="use-only", permissions=(Permission(action="use"),))


@dataclass(frozen=True)
class Asset:
    """Catalog entry: dataset description, usage policy, embedded claim,
    and any attestations the provider chooses to attach.

    ``payload_locator`` is provider-internal and redacted from the
    public catalog view.
    """

    asset_id: str
    description: str
    usage_policy: Policy
    claim: TrustClaim
    attestation_refs: tuple[Attestation, ...] = ()
    payload_locator: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "attestation_refs", tuple(self.attestation_refs))
        if not self.asset_id:
            raise ValueError("asset_id must be non-empty")

    def to_dict(self, public: bool = True) -> dict:
        data = {
            "asset_id": self.asset_id,
            "description": self.description,
            "usage_policy": self.usage_policy.to_dict(),
            "claim": self.claim.to_dict(),
            "attestation_refs": [a.to_dict() for a in self.attestation_refs],
        }
        if not public:
            data["payload_locator"] = self.payload_locator
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "Asset":
        return cls(
            asset_id=data["asset_id"],
            description=data.get("description", ""),
            usage_policy=Policy.from_dict(data["usage_policy"]),
            claim=TrustClaim.from_dict(data["claim"]),
            attestation_refs=tuple(
                Attestation.from_dict(a) for a in data.get("attestation_refs", [])
            ),
            payload_locator=data.get("payload_locator"),
        )


@dataclass(frozen=True)
class Catalog:
    provider_id: str
    assets: tuple[Asset, ...]
    issued_at: int

    def to_dict(self, public: bool = True) -> dict:
        return {
            "provider_id": self.provider_id,
            "assets": [a.to_dict(public=public) for a in self.assets],
            "issued_at": self.issued_at,
        }


# ---------------------------------------------------------------------------
# Negotiation state machine
# ---------------------------------------------------------------------------


class NegotiationState(str, Enum):
    REQUESTED = "REQUESTED"
    AGREED = "AGREED"
    FINALIZED = "FINALIZED"
    TERMINATED = "TERMINATED"


class NegotiationEvent(str, Enum):
    AGREE = "AGREE"
    FINALIZE = "FINALIZE"
    TERMINATE = "TERMINATE"


TRANSITIONS: dict[tuple[NegotiationState, NegotiationEvent], NegotiationState] = {
    (NegotiationState.REQUESTED, NegotiationEvent.AGREE): NegotiationState.AGREED,
    (NegotiationState.REQUESTED, NegotiationEvent.TERMINATE): NegotiationState.TERMINATED,
    (NegotiationState.AGREED, NegotiationEvent.FINALIZE): NegotiationState.FINALIZED,
    (NegotiationState.AGREED, NegotiationEvent.TERMINATE): NegotiationState.TERMINATED,
}

ABSORBING_STATES = (NegotiationState.FINALIZED, NegotiationState.TERMINATED)


@dataclass(frozen=True)
class Agreement:
    """Provider-signed record of a successful negotiation, pinning the
    exact policy and claim the consumer saw."""

    agreement_id: str
    asset_id: str
    consumer_id: str
    provider_id: str
    policy_hash: str
    claim_hash: str
    agreed_at: int
    signature: SignatureEnvelope

    def signing_payload(self) -> dict:
        return {
            "agreement_id": self.agreement_id,
            "asset_id": self.asset_id,
            "consumer_id": self.consumer_id,
            "provider_id": self.provider_id,
            "policy_hash": self.policy_hash,
            "claim_hash": self.claim_hash,
            "agreed_at": self.agreed_at,
        }

    def to_dict(self) -> dict:
        data = self.signing_payload()
        data["signature"] = self.signature.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "Agreement":
        return cls(
            agreement_id=data["agreement_id"],
            asset_id=data["asset_id"],
            consumer_id=data["consumer_id"],
            provider_id=data["provider_id"],
            policy_hash=data["policy_hash"],
            claim_hash=data["claim_hash"],
            agreed_at=data["agreed_at"],
            signature=SignatureEnvelope.from_dict(data["signature"]),
        )


@dataclass(frozen=True)
class NegotiationSession:
    session_id: str
    asset_id: str
    consumer_id: str
    state: NegotiationState
    agreement: Optional[Agreement] = None
    terminated_reason: Optional[str] = None

    def __post_init__(self):
        has_agreement = self.agreement is not None
        should_have = self.state in (NegotiationState.AGREED, NegotiationState.FINALIZED)
        if has_agreement != should_have:
            raise ValueError(
                f"agreement must be present iff state is AGREED/FINALIZED (state={self.state})"
            )

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "asset_id": self.asset_id,
            "consumer_id": self.consumer_id,
            "state": self.state.value,
            "agreement": self.agreement.to_dict() if self.agreement else None,
            "terminated_reason": self.terminated_reason,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NegotiationSession":
        agreement = data.get("agreement")
        return cls(
            session_id=data["session_id"],
            asset_id=data["asset_id"],
            consumer_id=data["consumer_id"],
            state=NegotiationState(data["state"]),
            agreement=Agreement.from_dict(agreement) if agreement else None,
            terminated_reason=data.get("terminated_reason"),
        )


def step(
    session: NegotiationSession,
    event: NegotiationEvent,
    agreement: Optional[Agreement] = None,
    reason: Optional[str] = None,
) -> NegotiationSession:
    """Apply one negotiation event, returning the successor session.

    Raises IllegalTransition (and leaves the input untouched) for any
    (state, event) pair outside the transition table.
    """
    target = TRANSITIONS.get((session.state, event))
    if target is None:
        raise IllegalTransition(
            f"event {event.value} not allowed in state {session.state.value}"
        )
    if target is NegotiationState.AGREED:
        if agreement is None:
            raise ValueError("AGREE requires an agreement")
        return NegotiationSession(
            session_id=session.session_id,
            asset_id=session.asset_id,
            consumer_id=session.consumer_id,
            state=target,
            agreement=agreement,
        )
    if target is NegotiationState.TERMINATED:
        return NegotiationSession(
            session_id=session.session_id,
            asset_id=session.asset_id,
            consumer_id=session.consumer_id,
            state=target,
            terminated_reason=reason or "terminated",
        )
    return NegotiationSession(
        session_id=session.session_id,
        asset_id=session.asset_id,
        consumer_id=session.consumer_id,
        state=target,
        agreement=session.agreement,
    )


# ---------------------------------------------------------------------------
# Provider side
# ---------------------------------------------------------------------------


class InMemoryDataSource:
    """Provider-internal payload store, addressed by opaque locators."""

    def __init__(self):
        self._payloads: dict[str, bytes] = {}

    def store(self, locator: str, payload: bytes) -> None:
        self._payloads[locator] = payload

    def resolve(self, locator: str) -> bytes:
        return self._payloads[locator]

    def locators(self) -> list[str]:
        return sorted(self._payloads)


class ProviderConnector:
    """Provider-side connector: catalog, negotiations, transfers.

    Catalog mutations copy-on-write the asset map; negotiation steps
    are serialized per session id, with no lock shared across sessions.
    """

    def __init__(
        self,
        provider_key: KeyPair,
        keys: KeyDirectory,
        clock=None,
        data_source: Optional[InMemoryDataSource] = None,
    ):
        self.provider_key = provider_key
        self.keys = keys
        self.data_source = data_source or InMemoryDataSource()
        self._clock = clock or (lambda: int(time.time()))
        self._assets: dict[str, Asset] = {}
        self._sessions: dict[str, NegotiationSession] = {}
        self._agreements: dict[str, str] = {}  # agreement_id -> session_id
        self._session_seq: dict[tuple[str, str], int] = {}
        self._mutate_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}

    @property
    def actor_id(self) -> str:
        return self.provider_key.key_id

    def now(self) -> int:
        return int(self._clock())

    # -- publication ---------------------------------------------------

    def publish(
        self,
        payload: bytes,
        description: str,
        policy: Policy,
        claim: TrustClaim,
        attestations: tuple[Attestation, ...] = (),
        asset_id: Optional[str] = None,
    ) -> Asset:
        """Register a dataset in the catalog.

        The claim must verify and its content hash must match the
        actual payload bytes; every attached attestation must bind to
        this exact claim.
        """
        asset_id = asset_id or claim.dataset_id
        public_key = self.keys.public_key_for(claim.provider_id)
        if public_key is None or not verify_payload(
            claim.signing_payload(), claim.signature, public_key
        ):
            raise InvalidClaim(f"claim {claim.claim_id} signature did not verify")
        actual_hash = content_hash(payload)
        if actual_hash != claim.content_hash:
            raise HashMismatch(
                f"claim declares {claim.content_hash}, payload hashes to {actual_hash}"
            )
        claim_hash = claim.canonical_hash()
        for att in attestations:
            if att.claim_hash != claim_hash:
                raise InvalidClaim(
                    f"attestation {att.attestation_id} does not reference this claim"
                )
        with self._mutate_lock:
            if asset_id in self._assets:
                raise DuplicateAssetId(f"asset {asset_id} already published")
            locator = f"mem://{asset_id}"
            self.data_source.store(locator, payload)
            asset = Asset(
                asset_id=asset_id,
                description=description,
                usage_policy=policy,
                claim=claim,
                attestation_refs=tuple(attestations),
                payload_locator=locator,
            )
            self._assets = {**self._assets, asset_id: asset}
        return asset

    def catalog(self) -> Catalog:
        assets = self._assets  # snapshot; map is replaced, never mutated
        return Catalog(
            provider_id=self.actor_id,
            assets=tuple(assets[k] for k in sorted(assets)),
            issued_at=self.now(),
        )

    def get_asset(self, asset_id: str) -> Optional[Asset]:
        return self._assets.get(asset_id)

    # -- negotiation ---------------------------------------------------

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._mutate_lock:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def handle_negotiation_request(
        self, asset_id: str, consumer_id: str, policy_hash: str, claim_hash: str
    ) -> NegotiationSession:
        """Open a session and immediately resolve it: agree when the
        request references an existing asset and echoes the correct
        policy and claim hashes, terminate otherwise."""
        with self._mutate_lock:
            seq = self._session_seq.get((asset_id, consumer_id), 0)
            self._session_seq[(asset_id, consumer_id)] = seq + 1
        session_id = derived_id(
            "session", {"asset_id": asset_id, "consumer_id": consumer_id, "seq": seq}
        )
        session = NegotiationSession(
            session_id=session_id,
            asset_id=asset_id,
            consumer_id=consumer_id,
            state=NegotiationState.REQUESTED,
        )
        asset = self._assets.get(asset_id)
        if asset is None:
            session = step(session, NegotiationEvent.TERMINATE, reason="unknown-asset")
        elif policy_hash != asset.usage_policy.canonical_hash():
            session = step(session, NegotiationEvent.TERMINATE, reason="policy-hash-mismatch")
        elif claim_hash != asset.claim.canonical_hash():
            session = step(session, NegotiationEvent.TERMINATE, reason="claim-hash-mismatch")
        else:
            agreement = self._make_agreement(session, asset)
            session = step(session, NegotiationEvent.AGREE, agreement=agreement)
        with self._mutate_lock:
            self._sessions[session_id] = session
            if session.agreement is not None:
                self._agreements[session.agreement.agreement_id] = session_id
        return session

    def _make_agreement(self, session: NegotiationSession, asset: Asset) -> Agreement:
        body = {
            "asset_id": asset.asset_id,
            "consumer_id": session.consumer_id,
            "provider_id": self.actor_id,
            "policy_hash": asset.usage_policy.canonical_hash(),
            "claim_hash": asset.claim.canonical_hash(),
            "agreed_at": self.now(),
        }
        agreement_id = derived_id("agreement", {**body, "session_id": session.session_id})
        payload = {"agreement_id": agreement_id, **body}
        signature = sign_payload(payload, self.provider_key)
        return Agreement(
            agreement_id=agreement_id,
            asset_id=body["asset_id"],
            consumer_id=body["consumer_id"],
            provider_id=body["provider_id"],
            policy_hash=body["policy_hash"],
            claim_hash=body["claim_hash"],
            agreed_at=body["agreed_at"],
            signature=signature,
        )

    def get_session(self, session_id: str) -> NegotiationSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no negotiation session {session_id}")
        return session

    def finalize(self, session_id: str) -> NegotiationSession:
        lock = self._lock_for(session_id)
        with lock:
            session = self.get_session(session_id)
            session = step(session, NegotiationEvent.FINALIZE)
            with self._mutate_lock:
                self._sessions[session_id] = session
            return session

    # -- transfer ------------------------------------------------------

    def transfer(self, agreement_id: str) -> tuple[bytes, str]:
        """Release payload bytes for a finalized agreement, together
        with the content hash the provider declares for them."""
        session_id = self._agreements.get(agreement_id)
        if session_id is None:
            raise NoSuchAgreement(f"no agreement {agreement_id}")
        session = self.get_session(session_id)
        if session.state is not NegotiationState.FINALIZED:
            raise NotFinalized(
                f"session {session_id} is {session.state.value}, transfer requires FINALIZED"
            )
        asset = self._assets[session.asset_id]
        payload = self.data_source.resolve(asset.payload_locator)
        return payload, asset.claim.content_hash

    def session_states(self) -> dict[str, str]:
        with self._mutate_lock:
            return {sid: s.state.value for sid, s in sorted(self._sessions.items())}


# ---------------------------------------------------------------------------
# Consumer side
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerifiedAsset:
    """Consumer-side view of one catalog asset after re-verification.

    ``valid_attestations`` hold only signature-verified attestations
    bound to this asset's claim; time windows and revocation are left
    to the decision point. Everything that failed verification is
    listed in ``ignored`` with its cause, and the asset is flagged.
    """

    asset: Asset
    provider_id: str
    claim_valid: bool
    valid_attestations: tuple[Attestation, ...]
    ignored: tuple[tuple[str, str], ...] = ()
    problems: tuple[str, ...] = ()

    @property
    def flagged(self) -> bool:
        return not self.claim_valid or bool(self.problems)

    def effective(self, revoked, now: int) -> AssuranceLevel:
        return effective_level(
            self.asset.claim if self.claim_valid else None,
            self.valid_attestations,
            revoked,
            now,
        )

    def to_dict(self) -> dict:
        return {
            "asset": self.asset.to_dict(),
            "provider_id": self.provider_id,
            "claim_valid": self.claim_valid,
            "valid_attestation_ids": [a.attestation_id for a in self.valid_attestations],
            "ignored": [{"attestation_id": i, "cause": c} for i, c in self.ignored],
            "problems": list(self.problems),
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class VerifiedCatalog:
    provider_id: str
    issued_at: int
    assets: tuple[VerifiedAsset, ...]

    def get(self, asset_id: str) -> Optional[VerifiedAsset]:
        for asset in self.assets:
            if asset.asset.asset_id == asset_id:
                return asset
        return None


@dataclass(frozen=True)
class NegotiationOutcome:
    session: NegotiationSession
    finalized: bool
    refusal_reason: Optional[str] = None

    @property
    def agreement_id(self) -> Optional[str]:
        return self.session.agreement.agreement_id if self.session.agreement else None


class ConsumerConnector:
    """Consumer-side connector: catalog verification, negotiation, and
    integrity-checked transfer."""

    def __init__(self, consumer_id: str, keys: KeyDirectory, clock=None):
        self.consumer_id = consumer_id
        self.keys = keys
        self._clock = clock or (lambda: int(time.time()))

    def now(self) -> int:
        return int(self._clock())

    def fetch_catalog(self, transport) -> VerifiedCatalog:
        """Pull a provider's catalog and re-verify every claim and
        attestation signature; nothing from the wire is trusted as-is."""
        raw = transport.get_catalog()
        try:
            provider_id = raw["provider_id"]
            issued_at = raw["issued_at"]
            assets = [Asset.from_dict(a) for a in raw["assets"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedCatalog(f"catalog response not parseable: {exc}") from exc
        verified = tuple(self._verify_asset(asset, provider_id) for asset in assets)
        return VerifiedCatalog(provider_id=provider_id, issued_at=issued_at, assets=verified)

    def _verify_asset(self, asset: Asset, provider_id: str) -> VerifiedAsset:
        problems: list[str] = []
        ignored: list[tuple[str, str]] = []

        claim = asset.claim
        claim_key = self.keys.public_key_for(claim.provider_id)
        if claim_key is None:
            claim_valid = False
            problems.append(f"no known key for claim provider {claim.provider_id}")
        else:
            claim_valid = verify_payload(claim.signing_payload(), claim.signature, claim_key)
            if not claim_valid:
                problems.append(f"claim {claim.claim_id} signature invalid")

        claim_hash = claim.canonical_hash()
        valid: list[Attestation] = []
        for att in asset.attestation_refs:
            if att.claim_hash != claim_hash:
                ignored.append((att.attestation_id, "claim-hash-mismatch"))
                problems.append(
                    f"attestation {att.attestation_id} does not bind to the asset claim"
                )
                continue
            att_key = self.keys.public_key_for(att.assurer_id)
            if att_key is None or not verify_payload(
                att.signing_payload(), att.signature, att_key
            ):
                ignored.append((att.attestation_id, "signature-invalid"))
                problems.append(f"attestation {att.attestation_id} signature invalid")
                continue
            valid.append(att)

        return VerifiedAsset(
            asset=asset,
            provider_id=provider_id,
            claim_valid=claim_valid,
            valid_attestations=tuple(valid),
            ignored=tuple(ignored),
            problems=tuple(problems),
        )

    def negotiate(self, transport, vasset: VerifiedAsset) -> NegotiationOutcome:
        """Run the full happy-path negotiation: request, verify the
        returned agreement, finalize. Refuses to finalize (and says
        why) when the agreement does not verify."""
        asset = vasset.asset
        policy_hash = asset.usage_policy.canonical_hash()
        claim_hash = asset.claim.canonical_hash()
        raw = transport.request_negotiation(
            asset.asset_id, self.consumer_id, policy_hash, claim_hash
        )
        session = NegotiationSession.from_dict(raw)
        if session.state is not NegotiationState.AGREED:
            return NegotiationOutcome(
                session=session, finalized=False, refusal_reason=session.terminated_reason
            )
        refusal = self._check_agreement(
            session.agreement, asset, vasset.provider_id, policy_hash, claim_hash
        )
        if refusal is not None:
            return NegotiationOutcome(session=session, finalized=False, refusal_reason=refusal)
        final = NegotiationSession.from_dict(
            transport.finalize_negotiation(session.session_id)
        )
        return NegotiationOutcome(
            session=final, finalized=final.state is NegotiationState.FINALIZED
        )

    def _check_agreement(
        self,
        agreement: Agreement,
        asset: Asset,
        provider_id: str,
        policy_hash: str,
        claim_hash: str,
    ) -> Optional[str]:
        if agreement.provider_id != provider_id:
            return "agreement-provider-mismatch"
        if agreement.asset_id != asset.asset_id:
            return "agreement-asset-mismatch"
        if agreement.consumer_id != self.consumer_id:
            return "agreement-consumer-mismatch"
        if agreement.policy_hash != policy_hash:
            return "agreement-policy-hash-mismatch"
        if agreement.claim_hash != claim_hash:
            return "agreement-claim-hash-mismatch"
        key = self.keys.public_key_for(agreement.provider_id)
        if key is None or not verify_payload(
            agreement.signing_payload(), agreement.signature, key
        ):
            return "agreement-signature-invalid"
        return None

    def transfer(self, transport, agreement_id: str, expected_content_hash: str) -> bytes:
        """Fetch payload bytes and accept them only if they hash to the
        claim's content hash."""
        payload, declared = transport.get_transfer(agreement_id)
        actual = content_hash(payload)
        if actual != expected_content_hash:
            raise IntegrityFailure(
                f"payload hashes to {actual}, claim declares {expected_content_hash}"
                + (f" (provider declared {declared})" if declared != actual else "")
            )
        return payload


# ---------------------------------------------------------------------------
# File-backed provider state (for the stateless CLI)
# ---------------------------------------------------------------------------


class FileProviderStore:
    """Persist a provider connector's assets, payloads, and sessions to
    a directory so separate CLI invocations can share state."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def save(self, provider: ProviderConnector) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "assets").mkdir(exist_ok=True)
        (self.root / "payloads").mkdir(exist_ok=True)
        (self.root / "sessions").mkdir(exist_ok=True)
        meta = {"provider_id": provider.actor_id}
        (self.root / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        for asset_id in sorted(provider._assets):
            asset = provider._assets[asset_id]
            path = self.root / "assets" / f"{asset_id}.json"
            path.write_text(json.dumps(asset.to_dict(public=False), indent=2) + "\n")
            payload = provider.data_source.resolve(asset.payload_locator)
            (self.root / "payloads" / asset_id).write_bytes(payload)
        for session_id, session in provider._sessions.items():
            path = self.root / "sessions" / f"{session_id}.json"
            path.write_text(json.dumps(session.to_dict(), indent=2) + "\n")

    def load(self, keys: KeyDirectory, clock=None) -> ProviderConnector:
        meta = json.loads((self.root / "meta.json").read_text())
        provider_key = keys.signer_for(meta["provider_id"])
        provider = ProviderConnector(provider_key=provider_key, keys=keys, clock=clock)
        assets_dir = self.root / "assets"
        if assets_dir.is_dir():
            for path in sorted(assets_dir.glob("*.json")):
                asset = Asset.from_dict(json.loads(path.read_text()))
                payload = (self.root / "payloads" / asset.asset_id).read_bytes()
                provider.publish(
                    payload=payload,
                    description=asset.description,
                    policy=asset.usage_policy,
                    claim=asset.claim,
                    attestations=asset.attestation_refs,
                    asset_id=asset.asset_id,
                )
        sessions_dir = self.root / "sessions"
        if sessions_dir.is_dir():
            for path in sorted(sessions_dir.glob("*.json")):
                session = NegotiationSession.from_dict(json.loads(path.read_text()))
                provider._sessions[session.session_id] = session
                if session.agreement is not None:
                    provider._agreements[session.agreement.agreement_id] = session.session_id
        return provider

    def exists(self) -> bool:
        return (self.root / "meta.json").is_file()
