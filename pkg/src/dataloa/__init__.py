"""Minimal data space with levels of assurance for data trustworthiness.

Providers publish datasets with signed trust claims; an assurance
provider audits evidence and issues time-bounded attestations;
consumers verify everything, compute each asset's effective assurance
level, and make risk-based accept/reject decisions before negotiating
usage agreements and transferring integrity-checked payloads.
"""

from .assurance import (
    AssuranceService,
    AuditOutcome,
    AuditResponse,
    LevelRequirement,
    LevelRequirements,
    RevocationEntry,
    RevocationList,
    audit,
    issue_attestation,
)
from .config import DeploymentConfig, load_config
from .connector import (
    Agreement,
    Asset,
    Catalog,
    ConsumerConnector,
    FileProviderStore,
    NegotiationEvent,
    NegotiationOutcome,
    NegotiationSession,
    NegotiationState,
    Permission,
    Policy,
    ProviderConnector,
    TRANSITIONS,
    VerifiedAsset,
    VerifiedCatalog,
    default_policy,
    step,
)
from .envelope import (
    KeyDirectory,
    KeyPair,
    SignatureEnvelope,
    canonicalize,
    content_hash,
    derived_id,
    generate_keypair,
    hash_of,
    load_key_file,
    save_key_files,
    sign_payload,
    verify_payload,
)
from .errors import (
    ConfigError,
    DataLoaError,
    DuplicateAssetId,
    HashMismatch,
    IllegalTransition,
    IntegrityFailure,
    InvalidClaim,
    InvalidClaimSignature,
    MalformedCatalog,
    ManifestMismatch,
    NoSuchAgreement,
    NonCanonicalizable,
    NotFinalized,
    ScenarioParseError,
    SigningFailure,
    StepFailure,
    UnknownAlgorithm,
    UnknownRiskClass,
    UnknownSession,
    Unreachable,
)
from .model import (
    ActorIdentity,
    ActorRole,
    AssuranceLevel,
    Attestation,
    EvidenceArtifact,
    EvidenceManifest,
    TrustClaim,
    build_manifest,
    create_claim,
    effective_level,
    make_actor_id,
)
from .policy_engine import (
    ConsumerPolicy,
    Decision,
    RiskClass,
    Verdict,
    decide,
)
from .scenario import (
    RunReport,
    Scenario,
    ScenarioRunner,
    bundled_scenarios,
    load_scenario,
    parse_scenario,
    run_scenario,
)
from .wire import (
    AssuranceHTTPServer,
    HttpAssuranceTransport,
    HttpProviderTransport,
    LocalAssuranceTransport,
    LocalProviderTransport,
    ProviderHTTPServer,
)

__version__ = "0.1.0"

__all__ = [
    "ActorIdentity",
    "ActorRole",
    "Agreement",
    "Asset",
    "AssuranceLevel",
    "AssuranceService",
    "AssuranceHTTPServer",
    "Attestation",
    "AuditOutcome",
    "AuditResponse",
    "Catalog",
    "ConfigError",
    "ConsumerConnector",
    "ConsumerPolicy",
    "DataLoaError",
    "Decision",
    "DeploymentConfig",
    "DuplicateAssetId",
    "EvidenceArtifact",
    "EvidenceManifest",
    "FileProviderStore",
    "HashMismatch",
    "HttpAssuranceTransport",
    "HttpProviderTransport",
    "IllegalTransition",
    "IntegrityFailure",
    "InvalidClaim",
    "InvalidClaimSignature",
    "KeyDirectory",
    "KeyPair",
    "LevelRequirement",
    "LevelRequirements",
    "LocalAssuranceTransport",
    "LocalProviderTransport",
    "MalformedCatalog",
    "ManifestMismatch",
    "NegotiationEvent",
    "NegotiationOutcome",
    "NegotiationSession",
    "NegotiationState",
    "NoSuchAgreement",
    "NonCanonicalizable",
    "NotFinalized",
    "Permission",
    "Policy",
    "ProviderConnector",
    "ProviderHTTPServer",
    "RevocationEntry",
    "RevocationList",
    "RiskClass",
    "RunReport",
    "Scenario",
    "ScenarioParseError",
    "ScenarioRunner",
    "SignatureEnvelope",
    "SigningFailure",
    "StepFailure",
    "TRANSITIONS",
    "TrustClaim",
    "UnknownAlgorithm",
    "UnknownRiskClass",
    "UnknownSession",
    "Unreachable",
    "Verdict",
    "VerifiedAsset",
    "VerifiedCatalog",
    "audit",
    "build_manifest",
    "bundled_scenarios",
    "canonicalize",
    "content_hash",
    "create_claim",
    "decide",
    "default_policy",
    "derived_id",
    "effective_level",
    "generate_keypair",
    "hash_of",
    "issue_attestation",
    "load_config",
    "load_key_file",
    "load_scenario",
    "make_actor_id",
    "parse_scenario",
    "run_scenario",
    "save_key_files",
    "sign_payload",
    "step",
    "verify_payload",
]
