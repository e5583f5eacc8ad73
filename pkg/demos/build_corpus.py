"""Rebuild the bundled 50-sample evaluation corpus.

The corpus pairs each task specification with a recorded completion text,
so the evaluation harness can be exercised offline. The mix is fixed:
48 executable plans, 44 of those correct, 3 of those minimal (one oracle
plan per bundled task). Run from the repository root:

    python demos/build_corpus.py
"""

from __future__ import annotations

from pathlib import Path

from plantagents import (
    EvalSample,
    bundled_catalog,
    bundled_task_specs,
    evaluate_corpus,
    format_manager_completion,
    oracle_plan_skills,
    save_corpus,
)

OUT_PATH = Path(__file__).resolve().parent.parent / "src" / "plantagents" / "data" / "corpus_50.json"


def insert_after(plan, code, extra):
    """Copy of plan with extra steps spliced in after the first code."""
    i = plan.index(code) + 1
    return plan[:i] + list(extra) + plan[i:]


def insert_before(plan, code, extra):
    i = plan.index(code)
    return plan[:i] + list(extra) + plan[i:]


def padded_variants(plan, prod_code, check_code, count):
    """Distinct correct-but-longer variants of an oracle plan.

    Three pad flavors, combined as needed: a redundant fault check next to
    the existing inspection stop, and one or more self-transports after the
    main production step (the robot fetches the workpiece and puts it back).
    """
    variants = [insert_before(plan, check_code, ["I2"])]
    for k in range(1, count):
        padded = insert_after(plan, prod_code, ["T1"] * ((k + 1) // 2))
        if k % 2 == 0:
            padded = insert_before(padded, check_code, ["I2"])
        variants.append(padded)
    assert len({tuple(v) for v in variants}) == count
    return variants


def main():
    registry = bundled_catalog()
    specs = {spec.id: spec for spec in bundled_task_specs()}
    drilled = specs["drilled_sheet"]
    lasered = specs["lasered_nameplate"]
    returned = specs["returned_nameplate"]

    def sample(spec, skills):
        return EvalSample(spec, format_manager_completion(registry, skills))

    plans = {spec_id: oracle_plan_skills(registry, spec) for spec_id, spec in specs.items()}
    samples = []

    # one minimal (oracle) plan per task
    for spec_id, spec in specs.items():
        samples.append(sample(spec, plans[spec_id]))

    # correct but longer than the oracle plan
    for skills in padded_variants(plans["drilled_sheet"], "M1", "I3", 14):
        samples.append(sample(drilled, skills))
    for skills in padded_variants(plans["lasered_nameplate"], "M2", "I3", 14):
        samples.append(sample(lasered, skills))
    for skills in padded_variants(plans["returned_nameplate"], "P2", "I3", 13):
        samples.append(sample(returned, skills))

    # executable but wrong: dropped production step, early quality test,
    # plain paint instead of the patterned variant, skipped quality test
    samples.append(sample(drilled, ["S1", "T1", "I1", "I3", "T1", "S2"]))
    samples.append(sample(lasered, ["S1", "T1", "I1", "I3", "T1", "M2", "T1", "L1", "T1", "S2"]))
    samples.append(sample(returned, ["S1", "T1", "P1", "T1", "I3", "T1", "S2"]))
    samples.append(sample(returned, ["S1", "T1", "P2", "T1", "S2"]))

    # not executable: free-text refusal, missing transport between modules
    samples.append(EvalSample(drilled, "I am not able to determine a skill sequence for this request."))
    samples.append(sample(lasered, ["S1", "T1", "I1", "M2", "T1", "L1", "T1", "I3", "T1", "S2"]))

    assert len(samples) == 50
    save_corpus(OUT_PATH, samples)

    metrics = evaluate_corpus(registry, samples)
    print(f"wrote {OUT_PATH} ({len(samples)} samples)")
    print(
        f"executable={metrics.executable_fraction}"
        f" correct={metrics.correct_fraction}"
        f" minimal={metrics.minimal_fraction}"
    )
    assert metrics.executable_fraction == 0.96
    assert metrics.correct_fraction == 0.88
    assert metrics.minimal_fraction == 0.06


if __name__ == "__main__":
    main()
