"""Run the three bundled tasks end to end and print what happened.

Serves a throwaway plant per task, lets the oracle backend stand in for a
language model, and writes each execution trace next to this script.

    python3 demos/run_bundled_tasks.py
"""

from pathlib import Path

from plantagents import (
    OracleBackend,
    PlantSim,
    bundled_catalog,
    bundled_task_specs,
    run_task,
    serve_plant,
)

OUT_DIR = Path(__file__).parent / "out"


def main() -> None:
    OUT_DIR.mkdir(exist_ok=True)
    catalog = bundled_catalog()
    specs = bundled_task_specs()

    for spec in specs:
        sim = PlantSim.standard_start(catalog, material=spec.material)
        service = serve_plant(sim)
        try:
            registry = catalog.rebased(service.base_url)
            backend = OracleBackend(registry, specs)
            trace = run_task(spec.instruction, backend, registry, service.base_url)
        finally:
            service.stop()

        print(f"task: {spec.instruction}")
        print(f"  outcome:   {trace.outcome}")
        print(f"  plan:      {' '.join(trace.skill_plan)}")
        print(f"  calls:     {len(trace.records)} service invocations, "
              f"{len(trace.transport_expansions())} transports expanded")
        wp = next(iter(trace.final_state["workpieces"].values()))
        features = ", ".join(
            f["kind"] + (f" ({f['detail']})" if f["detail"] else "")
            for f in wp["features"]
        )
        print(f"  workpiece: {features}")

        trace_file = OUT_DIR / f"trace_{spec.id}.json"
        trace.save(trace_file)
        print(f"  trace:     {trace_file}")
        print()


if __name__ == "__main__":
    main()
