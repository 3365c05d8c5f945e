"""Human-oversight service around the fairness-aware decision flow.

Cases come in, get analyzed on demand, and carry exactly one decision
unless an escalation overrides it.  Everything lands in a single
append-only line store that doubles as the audit trail; restarting the
service replays the store and reproduces the same state.
"""
import hashlib
import json
import math
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

from .contracts import FairnessContract
from .falsify import FalsifierConfig
from .fairness import FairnessVerdict, fairness_aware
from .traces import INF, DataError


class UnknownCaseError(KeyError):
    """No case with that id."""


class ConflictError(RuntimeError):
    """The operation contradicts the case's current state."""


class ValidationFailure(ValueError):
    """The request payload is structurally unacceptable."""


DECISION_ACTIONS = ("accept", "desk-reject", "escalate")
AUDIT_EVENTS = ("ingested", "analyzed", "decided", "flag-raised")
PAGE_SIZE = 50


@dataclass
class CaseRecord:
    id: str
    actual_input: Tuple[float, ...]
    created_at: str
    system_output: Optional[float] = None
    verdict: Optional[FairnessVerdict] = None
    decision: Optional[dict] = None

    @property
    def status(self) -> str:
        if self.verdict is None:
            return "pending"
        return "decided" if self.decision is not None else "analyzed"

    @property
    def flagged(self) -> bool:
        return self.verdict is not None and self.verdict.normalized_score < 0


@dataclass(frozen=True)
class AuditEntry:
    sequence: int
    timestamp: str
    actor: str
    event: str
    digest: str
    case_id: Optional[str] = None


class CasePage(NamedTuple):
    items: Tuple[CaseRecord, ...]
    total: int
    page: int


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _digest(doc) -> str:
    return hashlib.sha256(_canonical(doc).encode()).hexdigest()


def verdict_doc(v: FairnessVerdict) -> dict:
    maximally_unfair = v.normalized_score == -INF
    return {
        "system_output": v.system_output,
        "score": v.score,
        "f_of_din": v.f_of_din,
        "d_out": v.d_out,
        "normalized_score": None if maximally_unfair else v.normalized_score,
        "maximally_unfair": maximally_unfair,
        "counterpart": {
            "input": list(v.counterpart[0]),
            "output": v.counterpart[1],
        },
    }


def _verdict_from_doc(doc: dict) -> FairnessVerdict:
    normalized = -INF if doc["maximally_unfair"] else float(doc["normalized_score"])
    return FairnessVerdict(
        system_output=float(doc["system_output"]),
        score=float(doc["score"]),
        f_of_din=float(doc["f_of_din"]),
        d_out=float(doc["d_out"]),
        normalized_score=normalized,
        counterpart=(tuple(doc["counterpart"]["input"]), doc["counterpart"]["output"]),
    )


def case_summary(case: CaseRecord) -> dict:
    verdict = case.verdict
    normalized = None
    if verdict is not None and verdict.normalized_score != -INF:
        normalized = verdict.normalized_score
    return {
        "id": case.id,
        "created_at": case.created_at,
        "status": case.status,
        "flagged": case.flagged,
        "system_output": case.system_output,
        "normalized_score": normalized,
    }


def case_doc(case: CaseRecord) -> dict:
    doc = case_summary(case)
    doc["actual_input"] = list(case.actual_input)
    doc["verdict"] = None if case.verdict is None else verdict_doc(case.verdict)
    doc["decision"] = case.decision
    return doc


def audit_doc(entry: AuditEntry) -> dict:
    return {
        "sequence": entry.sequence,
        "timestamp": entry.timestamp,
        "actor": entry.actor,
        "event": entry.event,
        "digest": entry.digest,
        "case_id": entry.case_id,
    }


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class OversightService:
    """Case store, analyzer, and audit trail behind the HTTP endpoints.

    One lock serializes every mutation, so the analysis pool is
    effectively a single worker: at desk scale that is all the
    parallelism an overseer needs, and it makes at-most-once analysis
    per case trivial.  Reads take the same lock briefly to snapshot.

    Verdicts are reproducible: each case gets its own seed derived from
    the case id and the configured base seed, so re-analysis (and any
    auditor re-running the case) sees the identical verdict.
    """

    def __init__(
        self,
        system: Callable[[Sequence[float]], float],
        contract: FairnessContract,
        store_path,
        input_width: int = 5,
        base_seed: int = 0,
        beta: float = 300.0,
        max_iterations: int = 10_000,
        proposal=None,
        clock: Callable[[], str] = _utc_now,
    ):
        if input_width < 1:
            raise ValueError("input_width must be at least 1")
        self.system = system
        self.contract = contract
        self.input_width = input_width
        self.base_seed = base_seed
        self.beta = beta
        self.max_iterations = max_iterations
        self.proposal = proposal
        self._clock = clock
        self._lock = threading.RLock()
        self._cases: dict[str, CaseRecord] = {}
        self._audit: List[AuditEntry] = []
        self._next_case = 1
        self._store_path = Path(store_path)
        self._store_path.parent.mkdir(parents=True, exist_ok=True)
        if self._store_path.exists():
            self._replay()
        self._store = self._store_path.open("a", encoding="utf-8")

    # -- persistence ------------------------------------------------------

    def _replay(self) -> None:
        for line_no, line in enumerate(
            self._store_path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                kind = record["record"]
            except (ValueError, KeyError) as exc:
                raise DataError(f"{self._store_path}: line {line_no}: {exc}") from None
            if kind == "case":
                case = CaseRecord(
                    id=record["id"],
                    actual_input=tuple(float(x) for x in record["actual_input"]),
                    created_at=record["created_at"],
                )
                self._cases[case.id] = case
                number = int(case.id.rsplit("-", 1)[1])
                self._next_case = max(self._next_case, number + 1)
            elif kind == "verdict":
                case = self._cases[record["case_id"]]
                case.verdict = _verdict_from_doc(record["verdict"])
                case.system_output = case.verdict.system_output
            elif kind == "decision":
                self._cases[record["case_id"]].decision = record["decision"]
            elif kind == "audit":
                entry = AuditEntry(**record["entry"])
                if entry.sequence != len(self._audit) + 1:
                    raise DataError(
                        f"{self._store_path}: line {line_no}: audit sequence "
                        f"{entry.sequence} breaks the gapless chain"
                    )
                self._audit.append(entry)
            else:
                raise DataError(
                    f"{self._store_path}: line {line_no}: unknown record kind {kind!r}"
                )

    def _append(self, record: dict) -> None:
        self._store.write(_canonical(record) + "\n")
        self._store.flush()

    def _append_audit(self, actor: str, event: str, payload: dict, case_id: str) -> None:
        entry = AuditEntry(
            sequence=len(self._audit) + 1,
            timestamp=self._clock(),
            actor=actor,
            event=event,
            digest=_digest(payload),
            case_id=case_id,
        )
        self._audit.append(entry)
        self._append({"record": "audit", "entry": audit_doc(entry)})

    def close(self) -> None:
        self._store.close()

    # -- operations -------------------------------------------------------

    def _require(self, case_id: str) -> CaseRecord:
        try:
            return self._cases[case_id]
        except KeyError:
            raise UnknownCaseError(f"unknown case {case_id!r}") from None

    def _case_seed(self, case_id: str) -> int:
        material = f"{case_id}:{self.base_seed}".encode()
        return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")

    def ingest_case(self, input_vector, actor: str = "anonymous") -> CaseRecord:
        try:
            vec = tuple(float(x) for x in input_vector)
        except (TypeError, ValueError):
            raise ValidationFailure("input must be a vector of numbers") from None
        if len(vec) != self.input_width:
            raise ValidationFailure(
                f"expected {self.input_width} components, got {len(vec)}"
            )
        if any(math.isnan(x) or math.isinf(x) for x in vec):
            raise ValidationFailure("input components must be finite")
        with self._lock:
            case = CaseRecord(
                id=f"case-{self._next_case:06d}",
                actual_input=vec,
                created_at=self._clock(),
            )
            self._next_case += 1
            self._cases[case.id] = case
            payload = {
                "record": "case",
                "id": case.id,
                "actual_input": list(vec),
                "created_at": case.created_at,
            }
            self._append(payload)
            self._append_audit(actor, "ingested", payload, case.id)
            return case

    def analyze_case(self, case_id: str, actor: str = "anonymous") -> FairnessVerdict:
        with self._lock:
            case = self._require(case_id)
            if case.verdict is not None:
                return case.verdict
            cfg = FalsifierConfig(
                beta=self.beta,
                max_iterations=self.max_iterations,
                rng_seed=self._case_seed(case_id),
            )
            verdict = fairness_aware(
                self.system, self.contract, case.actual_input, cfg, self.proposal
            )
            case.verdict = verdict
            case.system_output = verdict.system_output
            doc = verdict_doc(verdict)
            self._append({"record": "verdict", "case_id": case_id, "verdict": doc})
            self._append_audit(actor, "analyzed", doc, case_id)
            if case.flagged:
                self._append_audit(actor, "flag-raised", doc, case_id)
            return verdict

    def record_decision(
        self, case_id: str, action: str, rationale: str, actor: str = "anonymous"
    ) -> CaseRecord:
        if action not in DECISION_ACTIONS:
            raise ValidationFailure(
                f"action must be one of {DECISION_ACTIONS}, got {action!r}"
            )
        if not isinstance(rationale, str):
            raise ValidationFailure("rationale must be text")
        with self._lock:
            case = self._require(case_id)
            if case.verdict is None:
                raise ConflictError("analysis required before a decision")
            if case.decision is not None and action != "escalate":
                raise ConflictError("case already decided; only escalation may follow")
            decision = {
                "action": action,
                "rationale": rationale,
                "decided_at": self._clock(),
            }
            case.decision = decision
            self._append({"record": "decision", "case_id": case_id, "decision": decision})
            self._append_audit(actor, "decided", decision, case_id)
            return case

    def get_case(self, case_id: str) -> CaseRecord:
        with self._lock:
            return self._require(case_id)

    def list_cases(
        self,
        flagged_only: bool = False,
        status: Optional[str] = None,
        page: int = 1,
        page_size: int = PAGE_SIZE,
    ) -> CasePage:
        if page < 1:
            raise ValidationFailure("page numbers start at 1")
        if status is not None and status not in ("pending", "analyzed", "decided"):
            raise ValidationFailure(f"unknown status filter {status!r}")
        with self._lock:
            cases = sorted(self._cases.values(), key=lambda c: (c.created_at, c.id))
        if status is not None:
            cases = [c for c in cases if c.status == status]
        if flagged_only:
            cases = [c for c in cases if c.flagged]
        start = (page - 1) * page_size
        return CasePage(tuple(cases[start : start + page_size]), len(cases), page)

    def audit_entries(self) -> Tuple[AuditEntry, ...]:
        with self._lock:
            return tuple(self._audit)


# ---------------------------------------------------------------------------
# HTTP layer


def create_app(service: OversightService):
    """FastAPI application exposing the service over HTTP.

    The acting user is taken from the X-Actor header; there is no further
    authentication by design.  CORS is wide open so a separately hosted
    dashboard can talk to the service directly.
    """
    from fastapi import FastAPI, Request
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel

    class IngestBody(BaseModel):
        input: List[float]

    class DecisionBody(BaseModel):
        action: str
        rationale: str

    app = FastAPI(title="oversight service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(UnknownCaseError)
    async def _unknown(request, exc):
        return JSONResponse(status_code=404, content={"detail": str(exc.args[0])})

    @app.exception_handler(ConflictError)
    async def _conflict(request, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(ValidationFailure)
    async def _invalid(request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    def actor_of(request: Request) -> str:
        return request.headers.get("x-actor", "anonymous")

    @app.post("/cases", status_code=201)
    def ingest(body: IngestBody, request: Request):
        case = service.ingest_case(body.input, actor_of(request))
        return case_doc(case)

    @app.get("/cases")
    def list_cases(flagged: bool = False, page: int = 1, status: Optional[str] = None):
        result = service.list_cases(flagged_only=flagged, status=status, page=page)
        return {
            "cases": [case_summary(c) for c in result.items],
            "total": result.total,
            "page": result.page,
        }

    @app.get("/cases/{case_id}")
    def get_case(case_id: str):
        return case_doc(service.get_case(case_id))

    @app.post("/cases/{case_id}/analyze")
    def analyze(case_id: str, request: Request):
        service.analyze_case(case_id, actor_of(request))
        return case_doc(service.get_case(case_id))

    @app.post("/cases/{case_id}/decision")
    def decide(case_id: str, body: DecisionBody, request: Request):
        case = service.record_decision(
            case_id, body.action, body.rationale, actor_of(request)
        )
        return case_doc(case)

    @app.get("/audit")
    def audit():
        return {"entries": [audit_doc(e) for e in service.audit_entries()]}

    return app
