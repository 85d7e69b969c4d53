"""Connectors: publication, negotiation state machine, transfer."""

from __future__ import annotations

import itertools
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dataloa.connector import (
    ABSORBING_STATES,
    TRANSITIONS,
    Agreement,
    ConsumerConnector,
    FileProviderStore,
    NegotiationEvent,
    NegotiationSession,
    NegotiationState,
    Permission,
    Policy,
    ProviderConnector,
    default_policy,
    step,
)
from dataloa.envelope import SignatureEnvelope, content_hash, verify_payload
from dataloa.errors import (
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
from dataloa.model import AssuranceLevel, TrustClaim, make_actor_id
from dataloa.wire import LocalProviderTransport

from conftest import CONSUMER_ID, NOW, PAYLOAD, PROVIDER_ID


# -- policies ---------------------------------------------------------------


def test_policy_rejects_unknown_action():
    with pytest.raises(ValueError):
        Permission(action="sell")


def test_policy_requires_at_least_one_permission():
    with pytest.raises(ValueError):
        Policy(policy_id="empty", permissions=())


def test_policy_hash_survives_reparse():
    policy = Policy(
        policy_id="share",
        permissions=(Permission("use"), Permission("distribute", "non-commercial")),
    )
    again = Policy.from_dict(policy.to_dict())
    assert again.canonical_hash() == policy.canonical_hash()


# -- publication ------------------------------------------------------------


def test_publish_appears_in_catalog(published):
    provider, asset, claim = published
    catalog = provider.catalog()
    assert [a.asset_id for a in catalog.assets] == ["wells-1"]
    assert catalog.provider_id == PROVIDER_ID
    assert catalog.assets[0].claim.claim_id == claim.claim_id


def test_public_catalog_redacts_payload_locator(published):
    provider, asset, _ = published
    assert "payload_locator" not in asset.to_dict(public=True)
    assert asset.to_dict(public=False)["payload_locator"] == "mem://wells-1"


def test_empty_catalog(provider):
    assert provider.catalog().assets == ()


def test_publish_rejects_payload_hash_mismatch(provider, make_claim):
    claim = make_claim()
    with pytest.raises(HashMismatch):
        provider.publish(
            payload=b"not the advertised bytes",
            description="",
            policy=default_policy(),
            claim=claim,
        )


def test_publish_rejects_duplicate_asset_id(published, make_claim):
    provider, _, _ = published
    with pytest.raises(DuplicateAssetId):
        provider.publish(
            payload=PAYLOAD,
            description="again",
            policy=default_policy(),
            claim=make_claim(),
        )


def test_publish_rejects_tampered_claim(provider, make_claim):
    claim = make_claim()
    forged = TrustClaim.from_dict({**claim.to_dict(), "issued_at": NOW + 1})
    with pytest.raises(InvalidClaim):
        provider.publish(
            payload=PAYLOAD, description="", policy=default_policy(), claim=forged
        )


def _attested(assurance, make_claim, make_manifest, level=2):
    claim = make_claim(level=level)
    manifest = make_manifest(claim)
    response = assurance.handle_audit(claim.to_dict(), manifest.to_dict(), level)
    assert response.passed
    from dataloa.model import Attestation

    return claim, Attestation.from_dict(response.attestation)


def test_publish_accepts_bound_attestation(provider, assurance, make_claim,
                                           make_manifest):
    claim, att = _attested(assurance, make_claim, make_manifest)
    asset = provider.publish(
        payload=PAYLOAD,
        description="",
        policy=default_policy(),
        claim=claim,
        attestations=(att,),
    )
    assert asset.attestation_refs == (att,)


def test_publish_rejects_foreign_attestation(provider, assurance, make_claim,
                                             make_manifest):
    _, att = _attested(assurance, make_claim, make_manifest)
    other = make_claim(dataset_id="unrelated")
    with pytest.raises(InvalidClaim):
        provider.publish(
            payload=PAYLOAD,
            description="",
            policy=default_policy(),
            claim=other,
            attestations=(att,),
        )


# -- state machine ----------------------------------------------------------

_DUMMY_SIG = SignatureEnvelope(alg="ed25519", key_id="k", sig="00" * 64)

_DUMMY_AGREEMENT = Agreement(
    agreement_id="agr-1",
    asset_id="a",
    consumer_id="c",
    provider_id="p",
    policy_hash="11" * 32,
    claim_hash="22" * 32,
    agreed_at=NOW,
    signature=_DUMMY_SIG,
)


def _session_in(state: NegotiationState) -> NegotiationSession:
    agreement = (
        _DUMMY_AGREEMENT
        if state in (NegotiationState.AGREED, NegotiationState.FINALIZED)
        else None
    )
    reason = "why" if state is NegotiationState.TERMINATED else None
    return NegotiationSession(
        session_id="s-1",
        asset_id="a",
        consumer_id="c",
        state=state,
        agreement=agreement,
        terminated_reason=reason,
    )


def test_exhaustive_transition_table():
    """Every (state, event) pair behaves per the declared table."""
    legal_seen = 0
    for state, event in itertools.product(NegotiationState, NegotiationEvent):
        session = _session_in(state)
        target = TRANSITIONS.get((state, event))
        if target is None:
            with pytest.raises(IllegalTransition):
                step(session, event, agreement=_DUMMY_AGREEMENT)
            assert session.state is state  # input untouched
        else:
            after = step(session, event, agreement=_DUMMY_AGREEMENT, reason="r")
            assert after.state is target
            assert after.session_id == session.session_id
            legal_seen += 1
    assert legal_seen == 4


def test_absorbing_states_accept_no_events():
    for state in ABSORBING_STATES:
        for event in NegotiationEvent:
            with pytest.raises(IllegalTransition):
                step(_session_in(state), event, agreement=_DUMMY_AGREEMENT)


def test_agree_without_agreement_is_an_error():
    with pytest.raises(ValueError):
        step(_session_in(NegotiationState.REQUESTED), NegotiationEvent.AGREE)


def test_terminate_records_reason():
    after = step(_session_in(NegotiationState.REQUESTED),
                 NegotiationEvent.TERMINATE, reason="no deal")
    assert after.terminated_reason == "no deal"
    assert step(_session_in(NegotiationState.AGREED),
                NegotiationEvent.TERMINATE).terminated_reason == "terminated"


@pytest.mark.parametrize("state,agreement", [
    (NegotiationState.AGREED, None),
    (NegotiationState.FINALIZED, None),
    (NegotiationState.REQUESTED, _DUMMY_AGREEMENT),
    (NegotiationState.TERMINATED, _DUMMY_AGREEMENT),
])
def test_session_invariant_agreement_iff_agreed_or_finalized(state, agreement):
    with pytest.raises(ValueError):
        NegotiationSession(
            session_id="s", asset_id="a", consumer_id="c",
            state=state, agreement=agreement,
        )


@settings(max_examples=200)
@given(events=st.lists(st.sampled_from(list(NegotiationEvent)), max_size=12))
def test_random_event_streams_stay_on_declared_states(events):
    session = _session_in(NegotiationState.REQUESTED)
    for event in events:
        try:
            session = step(session, event, agreement=_DUMMY_AGREEMENT, reason="r")
        except IllegalTransition:
            pass
        assert session.state in NegotiationState
        if session.state in ABSORBING_STATES:
            # nothing moves an absorbing session
            for probe in NegotiationEvent:
                with pytest.raises(IllegalTransition):
                    step(session, probe, agreement=_DUMMY_AGREEMENT)


def test_session_round_trips_through_dict():
    for state in NegotiationState:
        session = _session_in(state)
        assert NegotiationSession.from_dict(session.to_dict()) == session


# -- provider-side negotiation ---------------------------------------------


def _hashes(asset):
    return asset.usage_policy.canonical_hash(), asset.claim.canonical_hash()


def test_negotiation_happy_path(published, keys):
    provider, asset, _ = published
    policy_hash, claim_hash = _hashes(asset)
    session = provider.handle_negotiation_request(
        asset.asset_id, CONSUMER_ID, policy_hash, claim_hash
    )
    assert session.state is NegotiationState.AGREED
    agreement = session.agreement
    assert agreement.asset_id == asset.asset_id
    assert agreement.consumer_id == CONSUMER_ID
    assert verify_payload(
        agreement.signing_payload(), agreement.signature,
        keys.public_key_for(PROVIDER_ID),
    )
    final = provider.finalize(session.session_id)
    assert final.state is NegotiationState.FINALIZED
    assert provider.get_session(session.session_id).state is NegotiationState.FINALIZED


def test_negotiation_terminates_for_unknown_asset(provider):
    session = provider.handle_negotiation_request(
        "ghost", CONSUMER_ID, "00" * 32, "00" * 32
    )
    assert session.state is NegotiationState.TERMINATED
    assert session.terminated_reason == "unknown-asset"


def test_negotiation_terminates_on_policy_hash_mismatch(published):
    provider, asset, _ = published
    _, claim_hash = _hashes(asset)
    session = provider.handle_negotiation_request(
        asset.asset_id, CONSUMER_ID, "00" * 32, claim_hash
    )
    assert session.state is NegotiationState.TERMINATED
    assert session.terminated_reason == "policy-hash-mismatch"


def test_negotiation_terminates_on_claim_hash_mismatch(published):
    provider, asset, _ = published
    policy_hash, _ = _hashes(asset)
    session = provider.handle_negotiation_request(
        asset.asset_id, CONSUMER_ID, policy_hash, "00" * 32
    )
    assert session.state is NegotiationState.TERMINATED
    assert session.terminated_reason == "claim-hash-mismatch"


def test_repeat_requests_get_fresh_sessions(published):
    provider, asset, _ = published
    policy_hash, claim_hash = _hashes(asset)
    first = provider.handle_negotiation_request(
        asset.asset_id, CONSUMER_ID, policy_hash, claim_hash
    )
    second = provider.handle_negotiation_request(
        asset.asset_id, CONSUMER_ID, policy_hash, claim_hash
    )
    assert first.session_id != second.session_id
    assert first.agreement.agreement_id != second.agreement.agreement_id


def test_get_session_unknown_id(provider):
    with pytest.raises(UnknownSession):
        provider.get_session("nope")


def test_finalize_terminated_session_is_illegal(provider):
    session = provider.handle_negotiation_request(
        "ghost", CONSUMER_ID, "00" * 32, "00" * 32
    )
    with pytest.raises(IllegalTransition):
        provider.finalize(session.session_id)


def test_transfer_requires_finalized(published):
    provider, asset, claim = published
    policy_hash, claim_hash = _hashes(asset)
    session = provider.handle_negotiation_request(
        asset.asset_id, CONSUMER_ID, policy_hash, claim_hash
    )
    agreement_id = session.agreement.agreement_id
    with pytest.raises(NotFinalized):
        provider.transfer(agreement_id)
    provider.finalize(session.session_id)
    payload, declared = provider.transfer(agreement_id)
    assert payload == PAYLOAD
    assert declared == claim.content_hash


def test_transfer_unknown_agreement(provider):
    with pytest.raises(NoSuchAgreement):
        provider.transfer("nope")


# -- consumer side ----------------------------------------------------------


class _StubTransport:
    """Catalog-only transport serving a fixed dict."""

    def __init__(self, catalog_data):
        self.catalog_data = catalog_data

    def get_catalog(self):
        return self.catalog_data


def test_consumer_verifies_clean_catalog(published, consumer):
    provider, asset, _ = published
    catalog = consumer.fetch_catalog(LocalProviderTransport(provider))
    assert catalog.provider_id == PROVIDER_ID
    vasset = catalog.get(asset.asset_id)
    assert vasset.claim_valid
    assert not vasset.flagged
    # level-2 claim, no attestation: effectively self-asserted
    assert vasset.effective(frozenset(), NOW) is AssuranceLevel.SELF_ASSERTED


def test_consumer_flags_tampered_claim(published, consumer):
    provider, asset, _ = published
    data = provider.catalog().to_dict()
    data["assets"][0]["claim"]["issued_at"] += 1
    catalog = consumer.fetch_catalog(_StubTransport(data))
    vasset = catalog.get(asset.asset_id)
    assert vasset.flagged
    assert not vasset.claim_valid
    assert vasset.effective(frozenset(), NOW) is AssuranceLevel.UNASSERTED


def test_consumer_ignores_unbound_attestation(published, consumer, assurance,
                                              make_claim, make_manifest):
    provider, asset, _ = published
    other = make_claim(dataset_id="unrelated")
    response = assurance.handle_audit(
        other.to_dict(), make_manifest(other).to_dict(), 2
    )
    data = provider.catalog().to_dict()
    data["assets"][0]["attestation_refs"] = [response.attestation]
    vasset = consumer.fetch_catalog(_StubTransport(data)).get(asset.asset_id)
    assert vasset.valid_attestations == ()
    assert vasset.ignored[0][1] == "claim-hash-mismatch"
    assert vasset.flagged


def test_consumer_ignores_forged_attestation(provider, consumer, assurance,
                                             make_claim, make_manifest):
    claim = make_claim()
    response = assurance.handle_audit(
        claim.to_dict(), make_manifest(claim).to_dict(), 2
    )
    forged = {**response.attestation, "level_assured": 3}
    provider.publish(payload=PAYLOAD, description="", policy=default_policy(),
                     claim=claim)
    data = provider.catalog().to_dict()
    data["assets"][0]["attestation_refs"] = [forged]
    vasset = consumer.fetch_catalog(_StubTransport(data)).get(claim.dataset_id)
    assert vasset.valid_attestations == ()
    assert vasset.ignored[0][1] == "signature-invalid"


def test_consumer_rejects_malformed_catalog(consumer):
    with pytest.raises(MalformedCatalog):
        consumer.fetch_catalog(_StubTransport({"assets": "not-a-list"}))


def test_consumer_end_to_end_negotiate_and_transfer(published, consumer):
    provider, asset, claim = published
    transport = LocalProviderTransport(provider)
    vasset = consumer.fetch_catalog(transport).get(asset.asset_id)
    outcome = consumer.negotiate(transport, vasset)
    assert outcome.finalized
    assert outcome.session.state is NegotiationState.FINALIZED
    payload = consumer.transfer(transport, outcome.agreement_id, claim.content_hash)
    assert payload == PAYLOAD


def test_consumer_reports_provider_refusal(published, consumer):
    provider, asset, _ = published
    transport = LocalProviderTransport(provider)
    vasset = consumer.fetch_catalog(transport).get(asset.asset_id)
    stale = vasset.asset.to_dict(public=False)
    stale["claim"] = {**stale["claim"], "content_hash": "33" * 32}
    # a consumer working from a stale claim gets terminated by the provider
    from dataloa.connector import Asset, VerifiedAsset

    stale_vasset = VerifiedAsset(
        asset=Asset.from_dict(stale),
        provider_id=vasset.provider_id,
        claim_valid=True,
        valid_attestations=(),
    )
    outcome = consumer.negotiate(transport, stale_vasset)
    assert not outcome.finalized
    assert outcome.refusal_reason == "claim-hash-mismatch"
    assert outcome.agreement_id is None


class _CorruptingTransport:
    """Wraps a real transport and tampers with the returned agreement."""

    def __init__(self, inner):
        self.inner = inner

    def get_catalog(self):
        return self.inner.get_catalog()

    def request_negotiation(self, asset_id, consumer_id, policy_hash, claim_hash):
        raw = self.inner.request_negotiation(
            asset_id, consumer_id, policy_hash, claim_hash
        )
        if raw.get("agreement"):
            raw["agreement"]["agreed_at"] += 1
        return raw

    def finalize_negotiation(self, session_id):
        raise AssertionError("consumer must not finalize a corrupt agreement")


def test_consumer_refuses_bad_agreement_signature(published, consumer):
    provider, asset, _ = published
    transport = LocalProviderTransport(provider)
    vasset = consumer.fetch_catalog(transport).get(asset.asset_id)
    outcome = consumer.negotiate(_CorruptingTransport(transport), vasset)
    assert not outcome.finalized
    assert outcome.refusal_reason == "agreement-signature-invalid"
    # provider never saw a finalize; session stays AGREED
    states = provider.session_states()
    assert list(states.values()) == ["AGREED"]


def test_consumer_refuses_misdirected_agreement(published, keys):
    provider, asset, _ = published
    stranger = ConsumerConnector(
        consumer_id=make_actor_id("someone-else"), keys=keys, clock=lambda: NOW
    )
    transport = LocalProviderTransport(provider)

    class _Replay:
        def get_catalog(self):
            return transport.get_catalog()

        def request_negotiation(self, asset_id, consumer_id, policy_hash, claim_hash):
            # replay an agreement minted for a different consumer
            return transport.request_negotiation(
                asset_id, CONSUMER_ID, policy_hash, claim_hash
            )

    vasset = stranger.fetch_catalog(transport).get(asset.asset_id)
    outcome = stranger.negotiate(_Replay(), vasset)
    assert not outcome.finalized
    assert outcome.refusal_reason == "agreement-consumer-mismatch"


def test_transfer_integrity_failure_on_tampered_store(published, consumer):
    provider, asset, claim = published
    transport = LocalProviderTransport(provider)
    vasset = consumer.fetch_catalog(transport).get(asset.asset_id)
    outcome = consumer.negotiate(transport, vasset)
    provider.data_source.store("mem://wells-1", b"tampered after publication")
    with pytest.raises(IntegrityFailure):
        consumer.transfer(transport, outcome.agreement_id, claim.content_hash)


def test_concurrent_negotiations(published, keys):
    provider, asset, claim = published
    transport = LocalProviderTransport(provider)
    results = {}

    def run(name):
        consumer = ConsumerConnector(
            consumer_id=make_actor_id(name), keys=keys, clock=lambda: NOW
        )
        vasset = consumer.fetch_catalog(transport).get(asset.asset_id)
        outcome = consumer.negotiate(transport, vasset)
        payload = consumer.transfer(transport, outcome.agreement_id,
                                    claim.content_hash)
        results[name] = (outcome, payload)

    names = [f"consumer-{i}" for i in range(8)]
    threads = [threading.Thread(target=run, args=(n,)) for n in names]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert set(results) == set(names)
    assert all(outcome.finalized for outcome, _ in results.values())
    assert all(payload == PAYLOAD for _, payload in results.values())
    session_ids = {o.session.session_id for o, _ in results.values()}
    assert len(session_ids) == 8
    assert set(provider.session_states().values()) == {"FINALIZED"}


# -- file-backed provider state ---------------------------------------------


def test_file_store_round_trip(tmp_path, published, keys, consumer, make_claim):
    provider, asset, claim = published
    second = make_claim(payload=b"other bytes", dataset_id="wells-2")
    provider.publish(payload=b"other bytes", description="more wells",
                     policy=default_policy(), claim=second)
    transport = LocalProviderTransport(provider)
    vasset = consumer.fetch_catalog(transport).get(asset.asset_id)
    outcome = consumer.negotiate(transport, vasset)
    assert outcome.finalized

    store = FileProviderStore(tmp_path / "prov")
    assert not store.exists()
    store.save(provider)
    assert store.exists()

    reloaded = store.load(keys, clock=lambda: NOW)
    assert reloaded.catalog().to_dict() == provider.catalog().to_dict()
    assert reloaded.session_states() == provider.session_states()
    payload, declared = reloaded.transfer(outcome.agreement_id)
    assert payload == PAYLOAD
    assert declared == claim.content_hash
