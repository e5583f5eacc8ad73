"""Record oracle completions into a replay corpus, then run from it offline.

Replay keys are content hashes of the full prompt, so a recorded corpus
stays valid exactly as long as the prompts that produced it.

    python3 demos/record_and_replay.py
"""

import socket
from pathlib import Path

from plantagents import (
    OracleBackend,
    PlantSim,
    ReplayBackend,
    bundled_catalog,
    bundled_task_specs,
    run_task,
    serve_plant,
)
from plantagents.backends import prompt_hash

OUT_DIR = Path(__file__).parent / "out"


class RecordingBackend(ReplayBackend):
    """Falls through to a live backend on a miss and keeps the answer."""

    backend_id = "recording"

    def __init__(self, inner):
        super().__init__()
        self.inner = inner
        self.prompts: dict[str, str] = {}

    def complete(self, request):
        result = self.inner.complete(request)
        self.record(request.prompt, result.text)
        self.prompts[prompt_hash(request.prompt)] = request.prompt
        return result


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def run_once(catalog, specs, make_backend, port):
    # replay keys hash the whole prompt, URLs included, so both passes must
    # serve the plant at the same address
    spec = specs[2]  # the returned nameplate, 3 transports
    sim = PlantSim.standard_start(catalog, material=spec.material)
    service = serve_plant(sim, port=port)
    try:
        registry = catalog.rebased(service.base_url)
        backend = make_backend(registry)
        return run_task(spec.instruction, backend, registry, service.base_url), backend
    finally:
        service.stop()


def main() -> None:
    OUT_DIR.mkdir(exist_ok=True)
    catalog = bundled_catalog()
    specs = bundled_task_specs()
    corpus_path = OUT_DIR / "replay_corpus.json"
    port = free_port()

    # pass 1: record every prompt/completion pair the run needs
    trace, recorder = run_once(
        catalog, specs, lambda reg: RecordingBackend(OracleBackend(reg, specs)), port
    )
    recorder.save(corpus_path, prompts=recorder.prompts)
    print(f"recorded run: {trace.outcome}, {len(recorder)} completions -> {corpus_path}")

    # pass 2: same run, no oracle in sight
    replayed, _ = run_once(
        catalog, specs, lambda reg: ReplayBackend.from_file(corpus_path), port
    )
    print(f"replayed run: {replayed.outcome}, plan {' '.join(replayed.skill_plan)}")
    assert replayed.outcome == "completed"
    assert replayed.skill_plan == trace.skill_plan


if __name__ == "__main__":
    main()
