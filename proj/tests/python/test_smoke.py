import json
import math
import os
import pathlib

import pytest

import tracewise as tw

FIXTURES = pathlib.Path(os.environ.get("TRACEWISE_FIXTURE_DIR", pathlib.Path(__file__).parents[1] / "fixtures"))

KINDS = [
    "counting_elements",
    "sliding_window_max",
    "flood_fill",
    "edit_distance",
    "hierarchical_clustering",
    "prime_factorization",
    "permutation_with_duplicates",
    "game24",
]


@pytest.mark.parametrize("kind", KINDS)
def test_generate_solve_agrees_with_oracle(kind):
    for seed in range(5):
        inst = tw.generate(kind, seed=seed)
        assert inst["kind"] == kind
        assert tw.generate(kind, seed=seed) == inst
        ref = tw.solve(inst)
        expected = tw.oracle(inst)
        if kind == "game24":
            # any witness will do; each must reach 24 with the dealt cards
            assert ref["answer"]["solvable"] == expected["solvable"]
            for answer in (ref["answer"], expected):
                if answer["solvable"]:
                    value, violations = tw.verify_expression_24(answer["witness"], inst["payload"]["cards"])
                    assert (value, violations) == ("24", [])
        else:
            assert ref["answer"] == expected


@pytest.mark.parametrize("kind", KINDS)
def test_canonical_trace_round_trips_and_audits_clean(kind):
    inst = tw.generate(kind, seed=11)
    ref = tw.solve(inst)
    parsed = tw.parse(kind, ref["trace"])
    assert parsed["diagnostics"] == []
    assert not parsed["truncated"]
    assert parsed["canonical"] == ref["trace"]
    verdict = tw.audit(inst, ref["trace"])
    assert verdict["findings"] == []
    assert verdict["final_answer_correct"]


def test_wrong_answer_is_flagged():
    inst = tw.generate("prime_factorization", {"min_value": 30, "max_value": 30}, seed=1)
    text = tw.solve(inst)["trace"].replace("END()==[2,3,5]", "END()==[2,15]")
    kinds = {f["kind"] for f in tw.audit(inst, text)["findings"]}
    assert "WrongAnswer" in kinds


def test_fixtures_report_annotated_kinds():
    for path in sorted(FIXTURES.glob("d*.json")):
        result = tw.audit_fixture(json.loads(path.read_text()))
        assert result["annotated_present"], path.name


def test_verify_expression_24():
    value, violations = tw.verify_expression_24("(13-12)*(8*3)", [3, 8, 12, 13])
    assert value == "24"
    assert violations == []
    value, violations = tw.verify_expression_24("4*6", [4, 6, 1, 1])
    assert value == "24"
    assert violations


def test_closed_form_and_simulation():
    p = tw.success_probability(8, 4, 0.9)
    assert p == pytest.approx(1 - (1 - 0.9**7) ** 4)
    assert tw.log_failure_probability(8, 4, 0.9) == pytest.approx(4 * math.log1p(-(0.9**7)))
    est = tw.simulate_independent(8, 4, 0.9, 20000, seed=3)
    assert est["trials"] == 20000
    assert abs(est["estimate"] - p) <= 4 * est["std_error"]
    assert tw.simulate_independent(8, 4, 0.9, 20000, seed=3, workers=1) == est
    tree = tw.simulate_tree(6, 2, 0.1, 1000, 2000, seed=5)
    assert tree["model"] == "shared-tree"
    assert 0.0 <= tree["estimate"] <= 1.0


def test_plateau_scan():
    lo, hi = tw.plateau_scan(4, 0.99, 0.995)
    assert lo == 1
    assert tw.success_probability(hi, 4, 0.99) > 0.995
    assert tw.success_probability(hi + 1, 4, 0.99) <= 0.995


def test_errors_carry_codes():
    with pytest.raises(tw.TracewiseError) as info:
        tw.success_probability(0, 4, 0.9)
    assert tw.error_code(info.value) == "DomainError"
    with pytest.raises(ValueError):
        tw.generate("no_such_kind")


def test_prompt_contains_question():
    inst = tw.generate("game24", seed=2)
    text = tw.prompt(inst)
    cards = ", ".join(str(c) for c in inst["payload"]["cards"])
    assert f"Input: [{cards}]" in text


def test_synthetic_campaign(tmp_path):
    config = {
        "mode": "synthetic",
        "seed": 7,
        "runs_per_instance": 2,
        "policy": "perfect",
        "tasks": [{"kind": "permutation_with_duplicates", "count": 3, "size": {"length": 3, "distinct": 2}}],
        "output_dir": str(tmp_path / "out"),
    }
    result = tw.run_campaign(config, workers=1)
    assert result["responses"] == 6
    assert result["endpoint_calls"] == 0
    assert (tmp_path / "out" / "verdicts.jsonl").exists()
    groups = result["summary"]["groups"]
    assert groups
