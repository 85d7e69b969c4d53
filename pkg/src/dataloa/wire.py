"""Transports connecting consumers to providers and assurers.

Two interchangeable implementations of the same contract:

* local: direct in-process calls against a ProviderConnector or
  AssuranceService, still exchanging plain dicts so the consumer code
  path is byte-for-byte the same as over HTTP;
* http: a stdlib threaded HTTP server per actor plus a requests-based
  client, with domain errors mapped to status codes on the way out and
  reconstructed from the response body on the way back in.

A consumer holding a ProviderTransport cannot tell which one it has.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional, Protocol

import requests

from .assurance import AssuranceService, AuditResponse
from .connector import ProviderConnector
from .errors import (
    DataLoaError,
    HashMismatch,
    IllegalTransition,
    InvalidClaim,
    InvalidClaimSignature,
    MalformedCatalog,
    ManifestMismatch,
    NoSuchAgreement,
    NotFinalized,
    UnknownSession,
    Unreachable,
    error_for_wire_code,
    wire_code_for,
)

CONTENT_HASH_HEADER = "X-Content-Hash"

STATUS_FOR_ERROR: dict[type, int] = {
    UnknownSession: 404,
    NoSuchAgreement: 404,
    IllegalTransition: 409,
    NotFinalized: 409,
    InvalidClaimSignature: 400,
    ManifestMismatch: 400,
    HashMismatch: 400,
    InvalidClaim: 400,
}


class ProviderTransport(Protocol):
    def get_catalog(self) -> dict: ...

    def request_negotiation(
        self, asset_id: str, consumer_id: str, policy_hash: str, claim_hash: str
    ) -> dict: ...

    def get_negotiation(self, session_id: str) -> dict: ...

    def finalize_negotiation(self, session_id: str) -> dict: ...

    def get_transfer(self, agreement_id: str) -> tuple[bytes, str]: ...


class AssuranceTransport(Protocol):
    def request_audit(
        self, claim: dict, manifest: dict, requested_level: int
    ) -> dict: ...

    def get_revocations(self) -> list[dict]: ...

    def revoke(self, attestation_id: str, reason: str) -> None: ...


# ---------------------------------------------------------------------------
# Local (in-process) transports
# ---------------------------------------------------------------------------


class LocalProviderTransport:
    """Direct calls into a provider connector, dict-shaped like HTTP."""

    def __init__(self, provider: ProviderConnector):
        self.provider = provider

    def get_catalog(self) -> dict:
        return self.provider.catalog().to_dict(public=True)

    def request_negotiation(
        self, asset_id: str, consumer_id: str, policy_hash: str, claim_hash: str
    ) -> dict:
        session = self.provider.handle_negotiation_request(
            asset_id, consumer_id, policy_hash, claim_hash
        )
        return session.to_dict()

    def get_negotiation(self, session_id: str) -> dict:
        return self.provider.get_session(session_id).to_dict()

    def finalize_negotiation(self, session_id: str) -> dict:
        return self.provider.finalize(session_id).to_dict()

    def get_transfer(self, agreement_id: str) -> tuple[bytes, str]:
        return self.provider.transfer(agreement_id)


class LocalAssuranceTransport:
    """Direct calls into an assurance service, dict-shaped like HTTP."""

    def __init__(self, service: AssuranceService):
        self.service = service

    def request_audit(self, claim: dict, manifest: dict, requested_level: int) -> dict:
        return _audit_response_dict(
            self.service.handle_audit(claim, manifest, requested_level)
        )

    def get_revocations(self) -> list[dict]:
        return self.service.revocations.to_list()

    def revoke(self, attestation_id: str, reason: str) -> None:
        self.service.revoke(attestation_id, reason)


def _audit_response_dict(response: AuditResponse) -> dict:
    return {
        "passed": response.passed,
        "attestation": response.attestation,
        "missing_kinds": list(response.missing_kinds),
        "claim_cap_violation": response.claim_cap_violation,
        "reason": response.reason,
    }


# ---------------------------------------------------------------------------
# HTTP servers
# ---------------------------------------------------------------------------


class _QuietHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length) if length else b"{}"
        return json.loads(body.decode("utf-8"))

    def _send_json(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, payload: bytes, declared_hash: str) -> None:
        self.send_response(200)
        self.send_header("Content-Type", "application/octet-stream")
        self.send_header(CONTENT_HASH_HEADER, declared_hash)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _send_empty(self, status: int) -> None:
        self.send_response(status)
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _send_error_json(self, exc: DataLoaError) -> None:
        status = STATUS_FOR_ERROR.get(type(exc), 500)
        self._send_json(status, {"error": wire_code_for(exc), "message": str(exc)})


class _ProviderHandler(_QuietHandler):
    provider: ProviderConnector  # set on the subclass by the server

    def do_GET(self):
        try:
            if self.path == "/catalog":
                self._send_json(200, self.provider.catalog().to_dict(public=True))
            elif self.path.startswith("/negotiations/"):
                session_id = self.path.split("/", 2)[2]
                self._send_json(200, self.provider.get_session(session_id).to_dict())
            elif self.path.startswith("/transfers/"):
                agreement_id = self.path.split("/", 2)[2]
                payload, declared = self.provider.transfer(agreement_id)
                self._send_bytes(payload, declared)
            else:
                self._send_json(404, {"error": "not_found", "message": self.path})
        except DataLoaError as exc:
            self._send_error_json(exc)

    def do_POST(self):
        try:
            if self.path == "/negotiations":
                body = self._read_json()
                session = self.provider.handle_negotiation_request(
                    body["asset_id"],
                    body["consumer_id"],
                    body["policy_hash"],
                    body["claim_hash"],
                )
                self._send_json(201, session.to_dict())
            elif self.path.startswith("/negotiations/") and self.path.endswith("/finalize"):
                session_id = self.path.split("/")[2]
                self._send_json(200, self.provider.finalize(session_id).to_dict())
            else:
                self._send_json(404, {"error": "not_found", "message": self.path})
        except DataLoaError as exc:
            self._send_error_json(exc)
        except (KeyError, json.JSONDecodeError) as exc:
            self._send_json(400, {"error": "bad_request", "message": str(exc)})


class _AssuranceHandler(_QuietHandler):
    service: AssuranceService  # set on the subclass by the server

    def do_GET(self):
        try:
            if self.path == "/revocations":
                self._send_json(200, {"revocations": self.service.revocations.to_list()})
            else:
                self._send_json(404, {"error": "not_found", "message": self.path})
        except DataLoaError as exc:
            self._send_error_json(exc)

    def do_POST(self):
        try:
            if self.path == "/audits":
                body = self._read_json()
                response = self.service.handle_audit(
                    body["claim"], body["manifest"], body["requested_level"]
                )
                if response.passed:
                    self._send_json(200, response.attestation)
                else:
                    self._send_json(
                        422,
                        {
                            "missing_kinds": list(response.missing_kinds),
                            "claim_cap_violation": response.claim_cap_violation,
                            "reason": response.reason,
                        },
                    )
            elif self.path == "/revocations":
                body = self._read_json()
                self.service.revoke(body["attestation_id"], body.get("reason", ""))
                self._send_empty(204)
            else:
                self._send_json(404, {"error": "not_found", "message": self.path})
        except DataLoaError as exc:
            self._send_error_json(exc)
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            self._send_json(400, {"error": "bad_request", "message": str(exc)})


class _ActorServer:
    """Threaded HTTP server bound to an ephemeral localhost port."""

    def __init__(self, handler_cls: type, host: str = "127.0.0.1", port: int = 0):
        self._server = ThreadingHTTPServer((host, port), handler_cls)
        self._server.daemon_threads = True
        self._thread: Optional[threading.Thread] = None

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "_ActorServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "_ActorServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


class ProviderHTTPServer(_ActorServer):
    def __init__(self, provider: ProviderConnector, host: str = "127.0.0.1", port: int = 0):
        handler = type("BoundProviderHandler", (_ProviderHandler,), {"provider": provider})
        super().__init__(handler, host, port)


class AssuranceHTTPServer(_ActorServer):
    def __init__(self, service: AssuranceService, host: str = "127.0.0.1", port: int = 0):
        handler = type("BoundAssuranceHandler", (_AssuranceHandler,), {"service": service})
        super().__init__(handler, host, port)


# ---------------------------------------------------------------------------
# HTTP clients
# ---------------------------------------------------------------------------


class _HttpClient:
    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def _request(self, method: str, path: str, json_body: Optional[dict] = None):
        url = f"{self.base_url}{path}"
        try:
            response = self._session.request(
                method, url, json=json_body, timeout=self.timeout
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise Unreachable(f"{url}: {exc}") from exc
        return response

    def _raise_for_error(self, response) -> None:
        if response.status_code < 400:
            return
        try:
            body = response.json()
            code = body["error"]
            message = body.get("message", "")
        except (ValueError, KeyError):
            raise DataLoaError(
                f"HTTP {response.status_code} from {response.url}"
            ) from None
        raise error_for_wire_code(code, message)

    def _json_of(self, response):
        try:
            return response.json()
        except ValueError as exc:
            raise MalformedCatalog(f"non-JSON response from {response.url}") from exc


class HttpProviderTransport(_HttpClient):
    """requests-based client for a provider's HTTP endpoints."""

    def get_catalog(self) -> dict:
        response = self._request("GET", "/catalog")
        self._raise_for_error(response)
        return self._json_of(response)

    def request_negotiation(
        self, asset_id: str, consumer_id: str, policy_hash: str, claim_hash: str
    ) -> dict:
        response = self._request(
            "POST",
            "/negotiations",
            {
                "asset_id": asset_id,
                "consumer_id": consumer_id,
                "policy_hash": policy_hash,
                "claim_hash": claim_hash,
            },
        )
        self._raise_for_error(response)
        return self._json_of(response)

    def get_negotiation(self, session_id: str) -> dict:
        response = self._request("GET", f"/negotiations/{session_id}")
        self._raise_for_error(response)
        return self._json_of(response)

    def finalize_negotiation(self, session_id: str) -> dict:
        response = self._request("POST", f"/negotiations/{session_id}/finalize")
        self._raise_for_error(response)
        return self._json_of(response)

    def get_transfer(self, agreement_id: str) -> tuple[bytes, str]:
        response = self._request("GET", f"/transfers/{agreement_id}")
        self._raise_for_error(response)
        return response.content, response.headers.get(CONTENT_HASH_HEADER, "")


class HttpAssuranceTransport(_HttpClient):
    """requests-based client for an assurer's HTTP endpoints."""

    def request_audit(self, claim: dict, manifest: dict, requested_level: int) -> dict:
        response = self._request(
            "POST",
            "/audits",
            {"claim": claim, "manifest": manifest, "requested_level": requested_level},
        )
        if response.status_code == 422:
            body = self._json_of(response)
            return {
                "passed": False,
                "attestation": None,
                "missing_kinds": body.get("missing_kinds", []),
                "claim_cap_violation": body.get("claim_cap_violation", False),
                "reason": body.get("reason", ""),
            }
        self._raise_for_error(response)
        return {
            "passed": True,
            "attestation": self._json_of(response),
            "missing_kinds": [],
            "claim_cap_violation": False,
            "reason": "",
        }

    def get_revocations(self) -> list[dict]:
        response = self._request("GET", "/revocations")
        self._raise_for_error(response)
        return self._json_of(response).get("revocations", [])

    def revoke(self, attestation_id: str, reason: str) -> None:
        response = self._request(
            "POST", "/revocations", {"attestation_id": attestation_id, "reason": reason}
        )
        self._raise_for_error(response)
