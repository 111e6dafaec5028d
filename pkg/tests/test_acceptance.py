"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. Everything here works
offline: the mock and rule-based backends never touch the network.
"""
import json
import random
import string
import threading
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from explainseg.backends import MockBackend, Provenance, RawMappingText, RuleBasedBackend
from explainseg.corpus import (
    HumanLabel,
    Level,
    MappingPair,
    StudentResponse,
    load_question_bank,
    load_responses,
)
from explainseg.errors import MalformedJson, MappingParseError, SchemaViolation
from explainseg.evaluation import report_to_csv, report_to_json, sweep
from explainseg.pipeline import (
    DEFAULT_RULES,
    SIGNATURE_RULE,
    apply_rules,
    classify,
    grade_many,
    grade_response,
    result_to_dict,
)
from explainseg.prompting import serialize_mapping
from explainseg.segmentation import parse_mapping, verify_portion
from explainseg.service import create_app

from .conftest import DATA_DIR, QUESTIONS_DIR

PROV = Provenance("mock", "test")


def test_fig2_golden_flow(bank, mock_backend, multi_example, relational_example):
    """Exemplar fixtures give raw counts 6/1, post counts 5/1, and classify
    multistructural/relational at thresholds 1 and 2."""
    started = time.monotonic()
    question = bank["A-Q4"]
    for threshold in (1, 2):
        multi = grade_response(
            question,
            StudentResponse("A-Q4", "golden-multi", multi_example.explanation),
            mock_backend,
            threshold=threshold,
        )
        relational = grade_response(
            question,
            StudentResponse("A-Q4", "golden-rel", relational_example.explanation),
            mock_backend,
            threshold=threshold,
        )
        assert (multi.raw_count, multi.post_count) == (6, 5)
        assert (relational.raw_count, relational.post_count) == (1, 1)
        assert multi.level == Level.MULTISTRUCTURAL
        assert relational.level == Level.RELATIONAL
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    print(f"PASS: golden exemplar flow (raw 6/1, post 5/1, both thresholds) in {elapsed:.3f}s")


def test_metrics_match_independent_oracle():
    """kappa, p_o, p_e, precision, recall, F1, macro-F1 agree with the
    naive-loop oracle to 1e-12 on 240 random matrices plus degenerate ones."""
    from explainseg.evaluation import ConfusionMatrix, compute_metrics

    from .metrics_oracle import expand_pairs, oracle_kappa, oracle_macro_f1, oracle_prf

    started = time.monotonic()
    rng = random.Random(777)
    matrices = [
        (7, 0, 0, 0),  # degenerate: single cell on the diagonal
        (0, 0, 0, 9),
        (0, 5, 0, 0),  # degenerate: single off-diagonal cell
        (0, 0, 4, 0),
        (3, 3, 0, 0),  # empty gold-relational row
        (0, 0, 2, 2),
        (5, 0, 5, 0),  # nothing predicted relational
        (0, 4, 0, 4),
    ]
    while len(matrices) < 240:
        cells = tuple(rng.randrange(0, 40) for _ in range(4))
        if sum(cells) > 0:
            matrices.append(cells)

    checked = 0
    for mm, mr, rm, rr in matrices:
        matrix = ConfusionMatrix(mm=mm, mr=mr, rm=rm, rr=rr)
        pairs = expand_pairs(mm, mr, rm, rr)
        kappa, p_o, p_e = oracle_kappa(pairs)
        for positive, label in ((Level.MULTISTRUCTURAL, "m"), (Level.RELATIONAL, "r")):
            metrics = compute_metrics(matrix, positive)
            precision, recall, f1 = oracle_prf(pairs, label)
            assert abs(metrics.kappa - kappa) <= 1e-12
            assert abs(metrics.p_o - p_o) <= 1e-12
            assert abs(metrics.p_e - p_e) <= 1e-12
            assert abs(metrics.precision - precision) <= 1e-12
            assert abs(metrics.recall - recall) <= 1e-12
            assert abs(metrics.f1 - f1) <= 1e-12
            assert abs(metrics.macro.f1 - oracle_macro_f1(pairs)) <= 1e-12
        checked += 1
    elapsed = time.monotonic() - started
    assert checked >= 200
    assert elapsed < 5.0
    print(f"PASS: metrics oracle equivalence on {checked} matrices in {elapsed:.3f}s")


def _random_mapping(rng, question):
    """Random parsed mapping over the question's snippet, plus which group
    indices span both signature and body lines."""
    snippet = question.snippet
    signature = question.signature_line_indices
    body_lines = [
        l.text
        for l in snippet.lines
        if l.index not in signature and l.index in snippet.substantive_indices()
    ]
    signature_lines = [l.text for l in snippet.lines if l.index in signature]
    pairs = []
    spanning = []
    for i in range(rng.randrange(0, 7)):
        flavor = rng.randrange(5)
        if flavor == 0:  # signature only (sometimes plus a brace)
            code = signature_lines[0] + (rng.choice(["", "\n}"]))
        elif flavor == 1:  # signature plus a body line
            code = signature_lines[0] + "\n" + rng.choice(body_lines)
            spanning.append(i)
        elif flavor == 2:  # unresolvable
            code = "int nothing_here = 1;"
        else:  # one or two body lines
            take = min(rng.randrange(1, 3), len(body_lines))
            code = "\n".join(rng.sample(body_lines, take))
        pairs.append(MappingPair(code, "alpha beta"))
    raw = RawMappingText(serialize_mapping(pairs), PROV)
    return parse_mapping(raw, question, "alpha beta gamma"), spanning


def test_postprocessing_properties(bank):
    """On 1000 random mappings: post <= raw, the signature rule is idempotent,
    and groups spanning signature and body are never removed."""
    rng = random.Random(20250)
    questions = list(bank.values())
    for trial in range(1000):
        question = questions[trial % len(questions)]
        mapping, spanning = _random_mapping(rng, question)
        post = apply_rules(mapping, DEFAULT_RULES, question)
        assert len(post.groups) <= mapping.raw_count
        twice = apply_rules(post, [SIGNATURE_RULE], question)
        assert twice == post
        kept = set(post.groups)
        for index in spanning:
            assert mapping.groups[index] in kept
    print("PASS: post-processing properties on 1000 random mappings")


def test_threshold_monotonicity():
    """The multistructural set shrinks (weakly) as the threshold rises."""
    counts = range(0, 11)
    for t in (1, 2, 3):
        at_t = {n for n in counts if classify(n, t) == Level.MULTISTRUCTURAL}
        at_next = {n for n in counts if classify(n, t + 1) == Level.MULTISTRUCTURAL}
        assert at_next <= at_t
    print("PASS: threshold monotonicity over post_counts 0..10, thresholds 1..4")


def test_schema_robustness_corpus(sum_positives):
    """All 20 malformed files raise the designated typed error with a JSON
    path or byte offset, never an unhandled crash."""
    corpus_dir = DATA_DIR / "malformed"
    manifest = json.loads((corpus_dir / "manifest.json").read_text())
    assert len(manifest) == 20
    for entry in manifest:
        text = (corpus_dir / entry["file"]).read_text()
        raw = RawMappingText(text, PROV)
        with pytest.raises(MappingParseError) as err:
            parse_mapping(raw, sum_positives, "whatever")
        if entry["kind"] == "schema":
            assert isinstance(err.value, SchemaViolation), entry["file"]
            assert err.value.path == entry["path"], entry["file"]
        else:
            assert isinstance(err.value, MalformedJson), entry["file"]
            assert err.value.position >= 0
    print("PASS: 20 malformed mapping files produce typed errors with paths")


def test_verification_contract():
    """100 sampled substrings verify; 100 marker-tagged non-substrings do not."""
    rng = random.Random(606)
    words = "loop array index total sum value zero count return when each".split()

    def random_explanation():
        parts = []
        for _ in range(rng.randrange(6, 14)):
            parts.append(rng.choice(words))
            parts.append(" " * rng.randrange(1, 4))
        return "".join(parts).strip()

    positives = negatives = 0
    while positives < 100:
        text = random_explanation()
        start = rng.randrange(0, len(text) - 2)
        end = rng.randrange(start + 1, len(text) + 1)
        portion = text[start:end]
        if not any(ch.isalnum() for ch in portion):
            continue
        assert verify_portion(portion, text), (portion, text)
        positives += 1
    while negatives < 100:
        text = random_explanation()
        # The marker token cannot appear in any explanation by construction.
        portion = f"zzqx{negatives} " + rng.choice(words)
        assert not verify_portion(portion, text)
        negatives += 1
    print("PASS: verification contract on 100 substrings and 100 non-substrings")


class _CountingRuleBackend(RuleBasedBackend):
    def __init__(self, bank, config=None):
        super().__init__(bank, config)
        self._gauge_lock = threading.Lock()
        self._in_flight = 0
        self.max_in_flight = 0

    def _complete(self, request):
        with self._gauge_lock:
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
        try:
            time.sleep(0.001)
            return super()._complete(request)
        finally:
            with self._gauge_lock:
                self._in_flight -= 1


def test_batch_determinism_and_ordering(bank):
    """200 synthetic responses, concurrency 8 vs 1: byte-identical output,
    input order preserved, at most 8 concurrent backend entries."""
    started = time.monotonic()
    sentences = [
        "set x to zero",
        "loop over the array",
        "check if the value is positive",
        "add the value to x",
        "return x at the end",
        "the function takes an array and a size",
    ]
    rng = random.Random(888)
    responses = []
    for i in range(200):
        text = ". ".join(rng.sample(sentences, rng.randrange(1, 5))) + "."
        responses.append(StudentResponse("A-Q4", f"synth-{i:03d}", text))

    from explainseg.backends import BackendConfig

    outputs = {}
    for concurrency in (1, 8):
        backend = _CountingRuleBackend(
            bank, BackendConfig(concurrency_limit=8)
        )
        rows = grade_many(bank, responses, backend, concurrency=concurrency)
        assert [r.response_id for r in rows] == [r.response_id for r in responses]
        outputs[concurrency] = "\n".join(
            json.dumps(result_to_dict(row)) for row in rows
        ).encode()
        if concurrency == 8:
            assert backend.max_in_flight <= 8
    elapsed = time.monotonic() - started
    assert outputs[1] == outputs[8]
    assert elapsed < 10.0
    print(f"PASS: 200-response batch deterministic across concurrency in {elapsed:.3f}s")


def test_sweep_golden_report(bank, mock_backend):
    """The two-response corpus yields the checked-in report byte-for-byte."""
    responses = load_responses(DATA_DIR / "responses_two.jsonl")
    rows = grade_many(bank, responses, mock_backend)
    labels = {r.response_id: r.human_label for r in responses}
    report = sweep(rows, labels)
    assert [row.threshold for row in report.rows] == [1, 2, 3, 4]
    assert all(row.metrics.p_o == 1.0 for row in report.rows)

    golden_json = (DATA_DIR / "golden" / "sweep_report.json").read_text()
    golden_csv = (DATA_DIR / "golden" / "sweep_report.csv").read_text()
    assert report_to_json(report) == golden_json
    assert report_to_csv(report) == golden_csv
    print("PASS: sweep golden report matches byte-for-byte (JSON and CSV)")


def test_api_contract_feedback_and_attempt_limit(bank, mock_backend, relational_example):
    """[secondary-facing] service returns the relational feedback bar and
    rejects the 21st submission with 429."""
    client = TestClient(create_app(bank, mock_backend))
    payload = {"explanation": relational_example.explanation, "session_id": "contract"}
    for attempt in range(20):
        response = client.post("/api/questions/A-Q4/segment", json=payload)
        assert response.status_code == 200
        body = response.json()
        assert body["bar"] == {"post_count": 1, "max_segments": 6}
        assert body["level"] == "relational"
        assert body["attempt"] == {"used": attempt + 1, "max": 20}
    final = client.post("/api/questions/A-Q4/segment", json=payload)
    assert final.status_code == 429
    print("PASS: API contract (relational bar 1/6; 429 on attempt 21)")
