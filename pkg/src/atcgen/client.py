"""Chat-completions client: sampling config, transport retries, scenario
extraction from free-form responses, token-budget escalation and cost
accounting. A fixture-driven mock transport stands in for live endpoints in
tests and offline runs (endpoint "mock://<fixture dir>")."""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import requests

from .core import DomainError, InvalidScenario, Scenario, schema_problems

DEFAULT_MAX_TOKENS = 35_000
DEFAULT_ESCALATION_STEP = 10_000
DEFAULT_ESCALATION_CAP = 50_000

OUTCOME_OK = "ok"
OUTCOME_TRUNCATED = "truncated"
OUTCOME_FORMAT_ERROR = "format_error"
OUTCOME_TRANSPORT_ERROR = "transport_error"


class TransportError(DomainError):
    def __init__(self, msg: str, attempts: int = 1):
        super().__init__(msg)
        self.attempts = attempts


class AuthError(DomainError):
    pass


class NoValidScenario(DomainError):
    def __init__(self, reasons: List[str]):
        super().__init__("no JSON candidate parsed as a valid scenario: "
                         + ("; ".join(reasons) if reasons else "no candidates"))
        self.reasons = reasons


class BudgetExhausted(DomainError):
    def __init__(self, cap: int, budgets: List[int], history: List["CompletionRecord"]):
        super().__init__(f"no valid scenario within the {cap}-token budget cap "
                         f"(tried {budgets})")
        self.cap = cap
        self.budgets = budgets
        self.history = history


@dataclass
class ProviderConfig:
    endpoint: str
    model: str
    temperature: float = 1.0
    top_p: float = 1.0
    top_k: int = 0
    max_tokens: int = DEFAULT_MAX_TOKENS
    escalation_step: int = DEFAULT_ESCALATION_STEP
    escalation_cap: int = DEFAULT_ESCALATION_CAP
    price_per_mtok: Optional[float] = None
    api_key_env: str = "ATG_API_KEY"
    supports_top_k: bool = False
    extra_body: Optional[dict] = None
    retry_backoff: float = 0.5  # seconds; doubled per transport retry

    def __post_init__(self):
        if not 0 < self.max_tokens <= self.escalation_cap:
            raise ValueError("need 0 < max_tokens <= escalation_cap")
        if self.escalation_step <= 0:
            raise ValueError("escalation_step must be positive")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ProviderConfig":
        return cls(**obj)


@dataclass
class CompletionRecord:
    request_id: str
    prompt_hash: str
    text: str
    prompt_tokens: int
    completion_tokens: int
    cost: Optional[float]
    attempt: int
    outcome: str
    max_tokens: int = 0

    def to_json_obj(self) -> dict:
        return {"request_id": self.request_id, "prompt_hash": self.prompt_hash,
                "prompt_tokens": self.prompt_tokens,
                "completion_tokens": self.completion_tokens,
                "cost": self.cost, "attempt": self.attempt,
                "outcome": self.outcome, "max_tokens": self.max_tokens}


def prompt_hash(messages: List[dict]) -> str:
    payload = json.dumps(messages, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def build_request_body(messages: List[dict], cfg: ProviderConfig,
                       max_tokens: int) -> dict:
    body = {"model": cfg.model, "messages": messages,
            "temperature": cfg.temperature, "top_p": cfg.top_p,
            "max_tokens": max_tokens}
    if cfg.supports_top_k:
        body["top_k"] = cfg.top_k
    if cfg.extra_body:
        body.update(cfg.extra_body)
    return body


# -- transports --------------------------------------------------------------

class HttpTransport:
    """POSTs standard chat-completions JSON; retries 429/5xx and connection
    errors with exponential backoff (3 attempts), never retries auth errors."""

    RETRIES = 3

    def __init__(self):
        self.session = requests.Session()
        self.call_count = 0

    def send(self, body: dict, cfg: ProviderConfig) -> dict:
        key = os.environ.get(cfg.api_key_env)
        if not key:
            raise AuthError(f"credential environment variable "
                            f"{cfg.api_key_env} is not set")
        headers = {"Authorization": f"Bearer {key}",
                   "Content-Type": "application/json"}
        last_err = None
        for attempt in range(self.RETRIES):
            if attempt:
                time.sleep(cfg.retry_backoff * 2 ** (attempt - 1))
            self.call_count += 1
            try:
                resp = self.session.post(cfg.endpoint, json=body,
                                         headers=headers, timeout=600)
            except requests.ConnectionError as exc:
                last_err = f"connection error: {exc}"
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials "
                                f"(HTTP {resp.status_code})")
            if resp.status_code == 429 or resp.status_code >= 500:
                last_err = f"HTTP {resp.status_code}"
                continue
            resp.raise_for_status()
            return resp.json()
        raise TransportError(f"gave up after {self.RETRIES} attempts: "
                             f"{last_err}", attempts=self.RETRIES)


class MockFixtureMissing(DomainError):
    pass


class MockTransport:
    """Replays canned responses from a fixture directory.

    Fixture file <prompt_hash>.json holds either one response object or
    {"sequence": [...]} consumed one entry per call. Entries use
    {"text": ..., "finish_reason": "stop"|"length", "completion_tokens": n}
    or {"status": 500} to script a transport failure.
    """

    RETRIES = 3

    def __init__(self, directory: str):
        self.directory = Path(directory)
        self.call_count = 0
        self._cursor: Dict[str, int] = {}

    def _next_entry(self, phash: str) -> dict:
        path = self.directory / f"{phash}.json"
        if not path.exists():
            raise MockFixtureMissing(f"no fixture for prompt hash {phash} "
                                     f"in {self.directory}")
        fixture = json.loads(path.read_text())
        if isinstance(fixture, dict) and "sequence" in fixture:
            seq = fixture["sequence"]
            i = min(self._cursor.get(phash, 0), len(seq) - 1)
            self._cursor[phash] = i + 1
            return seq[i]
        return fixture

    def send(self, body: dict, cfg: ProviderConfig) -> dict:
        phash = prompt_hash(body["messages"])
        last_err = None
        for attempt in range(self.RETRIES):
            self.call_count += 1
            entry = self._next_entry(phash)
            status = entry.get("status", 200)
            if status in (401, 403):
                raise AuthError(f"mock scripted HTTP {status}")
            if status == 429 or status >= 500:
                last_err = f"HTTP {status}"
                continue
            return {
                "id": f"mock-{self.call_count}",
                "choices": [{
                    "message": {"role": "assistant",
                                "content": entry.get("text", "")},
                    "finish_reason": entry.get("finish_reason", "stop"),
                }],
                "usage": {
                    "prompt_tokens": entry.get("prompt_tokens", 100),
                    "completion_tokens": entry.get("completion_tokens", 200),
                },
            }
        raise TransportError(f"gave up after {self.RETRIES} attempts: "
                             f"{last_err}", attempts=self.RETRIES)


def make_transport(cfg: ProviderConfig):
    if cfg.endpoint.startswith("mock://"):
        return MockTransport(cfg.endpoint[len("mock://"):])
    return HttpTransport()


# -- completion --------------------------------------------------------------

def complete(messages, cfg: ProviderConfig, transport=None,
             max_tokens: Optional[int] = None, attempt: int = 1
             ) -> CompletionRecord:
    """One chat completion round-trip (plus transport retries)."""
    if isinstance(messages, str):
        messages = [{"role": "user", "content": messages}]
    transport = transport or make_transport(cfg)
    budget = max_tokens or cfg.max_tokens
    body = build_request_body(messages, cfg, budget)
    response = transport.send(body, cfg)
    choice = response["choices"][0]
    text = choice["message"]["content"] or ""
    usage = response.get("usage", {})
    completion_tokens = int(usage.get("completion_tokens", 0))
    cost = (completion_tokens * cfg.price_per_mtok / 1e6
            if cfg.price_per_mtok is not None else None)
    outcome = (OUTCOME_TRUNCATED if choice.get("finish_reason") == "length"
               else OUTCOME_OK)
    return CompletionRecord(
        request_id=str(response.get("id", "")),
        prompt_hash=prompt_hash(messages),
        text=text,
        prompt_tokens=int(usage.get("prompt_tokens", 0)),
        completion_tokens=completion_tokens,
        cost=cost, attempt=attempt, outcome=outcome, max_tokens=budget)


# -- scenario extraction -----------------------------------------------------

_FENCE_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)


def _brace_spans(text: str) -> List[str]:
    spans = []
    depth = 0
    start = None
    in_string = False
    escape = False
    for i, ch in enumerate(text):
        if escape:
            escape = False
            continue
        if ch == "\\" and in_string:
            escape = True
        elif ch == '"':
            in_string = not in_string
        elif not in_string:
            if ch == "{":
                if depth == 0:
                    start = i
                depth += 1
            elif ch == "}" and depth:
                depth -= 1
                if depth == 0:
                    spans.append(text[start:i + 1])
    return spans


def extract_scenario_json(text: str) -> Scenario:
    """First JSON candidate in the response that is a schema-valid scenario.

    Fenced code blocks are tried before bare brace-balanced spans, each in
    order of appearance; the first valid candidate wins.
    """
    candidates = [m.strip() for m in _FENCE_RE.findall(text)]
    candidates += _brace_spans(text)
    reasons = []
    for i, cand in enumerate(candidates):
        try:
            obj = json.loads(cand)
        except json.JSONDecodeError as exc:
            reasons.append(f"candidate {i}: invalid JSON ({exc.msg})")
            continue
        problems = schema_problems(obj)
        if problems:
            reasons.append(f"candidate {i}: {problems[0]}")
            continue
        try:
            scenario = Scenario.from_json_obj(obj)
            scenario.check()
            return scenario
        except InvalidScenario as exc:
            reasons.append(f"candidate {i}: {exc}")
    raise NoValidScenario(reasons)


def escalation_budgets(cfg: ProviderConfig) -> List[int]:
    budgets = [cfg.max_tokens]
    while budgets[-1] < cfg.escalation_cap:
        budgets.append(min(budgets[-1] + cfg.escalation_step,
                           cfg.escalation_cap))
    return budgets


def complete_with_escalation(messages, cfg: ProviderConfig, transport=None
                             ) -> Tuple[Scenario, List[CompletionRecord]]:
    """Retry truncated or unparseable completions with growing token budgets.

    Returns the first valid scenario with the full attempt history; raises
    BudgetExhausted (carrying the history) once the cap attempt fails.
    """
    if isinstance(messages, str):
        messages = [{"role": "user", "content": messages}]
    transport = transport or make_transport(cfg)
    history: List[CompletionRecord] = []
    budgets = escalation_budgets(cfg)
    for attempt, budget in enumerate(budgets, start=1):
        record = complete(messages, cfg, transport=transport,
                          max_tokens=budget, attempt=attempt)
        history.append(record)
        if record.outcome == OUTCOME_TRUNCATED:
            continue
        try:
            scenario = extract_scenario_json(record.text)
            return scenario, history
        except NoValidScenario:
            record.outcome = OUTCOME_FORMAT_ERROR
            continue
    raise BudgetExhausted(cfg.escalation_cap,
                          [r.max_tokens for r in history], history)


def history_cost(history: List[CompletionRecord]) -> Optional[float]:
    costs = [r.cost for r in history if r.cost is not None]
    return sum(costs) if costs else None
