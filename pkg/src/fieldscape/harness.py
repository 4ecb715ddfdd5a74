"""End-to-end experiment runner: simulate, persist, vectorize, classify, report.

Every sample is drawn from its own Philox substream keyed by (matern row,
model, split, sample index), so reruns and different thread counts produce
byte-identical outputs.  Work is parallelized over samples with results
collected in manifest order.

The t-grid for vectorization is derived per matern row from the training
diagrams of all models in that row and reused verbatim on test data;
calibration parameters likewise come from the training split only.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .classify import LabeledSet, evaluate, train_calibrated
from .config import ExperimentConfig
from .critical import detect_critical, write_census_csv
from .cubical import ScalarField, build_filtration, make_generic, read_field_csv, write_field_csv
from .grf import MaternParams, ModelSpec, sample_model, substream
from .landscape import (
    LandscapeVector,
    average,
    default_grid,
    difference,
    vectorize,
    write_vector_csv,
)
from .persistence import PersistenceDiagram, compute_persistence, write_diagram_csv

# Benchmark cells reported for this experiment layout by the study whose
# Matern rows the defaults mirror.  The bundled placeholder transforms do not
# reproduce them; they document the report format and the expected
# calibration <= accuracy ordering.
REFERENCE_REPORT_CELLS = {
    # (eta, nu): {comparison: (accuracy, calibration)}
    (5.0, 1.0): {"M1 v M2": (100.0, 97.4), "M1 v M3": (93.4, 88.1), "M2 v M3": (100.0, 97.2)},
    (10.0, 1.0): {"M1 v M2": (100.0, 96.3), "M1 v M3": (83.1, 73.3), "M2 v M3": (98.8, 94.9)},
    (5.0, 2.0): {"M1 v M2": (100.0, 97.4), "M1 v M3": (87.9, 80.9), "M2 v M3": (100.0, 97.1)},
}


@dataclass(frozen=True)
class ReportRow:
    comparison: str
    eta: float
    nu: float
    accuracy: float
    calibration: float


def _fmt_g(x: float) -> str:
    return format(x, "g")


def row_label(eta: float, nu: float) -> str:
    return f"eta{_fmt_g(eta)}-nu{_fmt_g(nu)}"


def model_specs(cfg: ExperimentConfig, eta: float, nu: float) -> list[ModelSpec]:
    params = MaternParams(eta=eta, nu=nu, sigma2=cfg.sigma2, spacing=cfg.spacing)
    return [ModelSpec(name=name, transform=transform, matern=params) for name, transform in cfg.models]


def _parallel_map(fn, items, threads: int):
    """Ordered map, threaded when asked; output order never depends on scheduling."""
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _sample_jobs(cfg: ExperimentConfig):
    """Every (row, model, split, index) of the experiment, in manifest order."""
    jobs = []
    for row_i, (eta, nu) in enumerate(cfg.matern):
        for model_i, spec in enumerate(model_specs(cfg, eta, nu)):
            for split_i, (split, count) in enumerate((("train", cfg.train), ("test", cfg.test))):
                for sample_i in range(count):
                    jobs.append((row_i, eta, nu, model_i, spec, split_i, split, sample_i))
    return jobs


def _draw(cfg: ExperimentConfig, job) -> ScalarField:
    row_i, _eta, _nu, model_i, spec, split_i, _split, sample_i = job
    rng = substream(cfg.seed, row_i, model_i, split_i, sample_i)
    return sample_model(spec, cfg.rows, cfg.cols, rng, sampler=cfg.sampler)


def run_simulate(cfg: ExperimentConfig) -> Path:
    """Write one field CSV per sample plus a manifest listing every substream."""
    out = Path(cfg.out)
    fields_dir = out / "fields"
    fields_dir.mkdir(parents=True, exist_ok=True)

    jobs = _sample_jobs(cfg)
    fields = _parallel_map(lambda job: _draw(cfg, job), jobs, cfg.threads)

    manifest_rows = []
    for job, field in zip(jobs, fields):
        row_i, eta, nu, model_i, spec, split_i, split, sample_i = job
        rel = Path(row_label(eta, nu)) / spec.name / f"{split}-{sample_i:04d}.csv"
        path = fields_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        write_field_csv(field, path)
        manifest_rows.append(
            {
                "eta": _fmt_g(eta),
                "nu": _fmt_g(nu),
                "model": spec.name,
                "split": split,
                "index": sample_i,
                "substream": f"{cfg.seed}:{row_i}.{model_i}.{split_i}.{sample_i}",
                "path": str(Path("fields") / rel),
            }
        )

    manifest = out / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["eta", "nu", "model", "split", "index", "substream", "path"])
        writer.writeheader()
        writer.writerows(manifest_rows)
    return manifest


def diagram_of_field(field: ScalarField) -> PersistenceDiagram:
    return compute_persistence(build_filtration(make_generic(field)))


@dataclass
class _RowData:
    """All per-sample artifacts of one matern row, keyed by model name."""

    eta: float
    nu: float
    train_diagrams: dict[str, list[PersistenceDiagram]]
    test_diagrams: dict[str, list[PersistenceDiagram]]
    train_vectors: dict[str, list[LandscapeVector]]
    test_vectors: dict[str, list[LandscapeVector]]


def _compute_row(cfg: ExperimentConfig, row_i: int, eta: float, nu: float) -> _RowData:
    specs = model_specs(cfg, eta, nu)
    jobs = [job for job in _sample_jobs(cfg) if job[0] == row_i]
    fields = _parallel_map(lambda job: _draw(cfg, job), jobs, cfg.threads)
    diagrams = _parallel_map(diagram_of_field, fields, cfg.threads)

    train: dict[str, list[PersistenceDiagram]] = {s.name: [] for s in specs}
    test: dict[str, list[PersistenceDiagram]] = {s.name: [] for s in specs}
    for job, diagram in zip(jobs, diagrams):
        (train if job[6] == "train" else test)[job[4].name].append(diagram)

    grid = default_grid([d for ds in train.values() for d in ds], cfg.bins)
    train_vecs = {
        name: _parallel_map(lambda d: vectorize(d, grid, cfg.depth), ds, cfg.threads)
        for name, ds in train.items()
    }
    test_vecs = {
        name: _parallel_map(lambda d: vectorize(d, grid, cfg.depth), ds, cfg.threads)
        for name, ds in test.items()
    }
    return _RowData(
        eta=eta, nu=nu,
        train_diagrams=train, test_diagrams=test,
        train_vectors=train_vecs, test_vectors=test_vecs,
    )


def _labeled(pos: list[LandscapeVector], neg: list[LandscapeVector]) -> LabeledSet:
    return LabeledSet.from_vectors(pos + neg, [1.0] * len(pos) + [-1.0] * len(neg))


def compare_models(row: _RowData, name_a: str, name_b: str, cost: float) -> ReportRow:
    """Train on the row's training split, evaluate on the test split.

    The first model is the positive class.
    """
    train = _labeled(row.train_vectors[name_a], row.train_vectors[name_b])
    test = _labeled(row.test_vectors[name_a], row.test_vectors[name_b])
    model = train_calibrated(train, C=cost)
    report = evaluate(model, test)
    return ReportRow(
        comparison=f"{name_a} v {name_b}",
        eta=row.eta, nu=row.nu,
        accuracy=report.accuracy, calibration=report.calibration,
    )


def write_report_csv(rows: list[ReportRow], path) -> None:
    lines = ["comparison,eta,nu,accuracy,calibration"]
    lines += [
        f"{r.comparison},{_fmt_g(r.eta)},{_fmt_g(r.nu)},{r.accuracy:.1f},{r.calibration:.1f}"
        for r in rows
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_report_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["comparison", "eta", "nu", "accuracy", "calibration"]:
            raise ValueError(f"{path}: not a report file")
        return [dict(row) for row in reader]


def run_experiment(cfg: ExperimentConfig) -> Path:
    """Full sweep: one report row per (matern row, model pair).

    Also writes per-model average landscape vectors and pairwise differences
    for plotting.
    """
    out = Path(cfg.out)
    (out / "averages").mkdir(parents=True, exist_ok=True)
    (out / "differences").mkdir(parents=True, exist_ok=True)

    report_rows: list[ReportRow] = []
    for row_i, (eta, nu) in enumerate(cfg.matern):
        row = _compute_row(cfg, row_i, eta, nu)
        label = row_label(eta, nu)

        averages = {}
        for name in row.train_vectors:
            averages[name] = average(row.train_vectors[name] + row.test_vectors[name])
            write_vector_csv(averages[name], out / "averages" / f"{label}-{name}.csv")
        for name_a, name_b in combinations([s.name for s in model_specs(cfg, eta, nu)], 2):
            diff = difference(averages[name_a], averages[name_b])
            write_vector_csv(diff, out / "differences" / f"{label}-{name_a}v{name_b}.csv")
            report_rows.append(compare_models(row, name_a, name_b, cfg.cost))

    report = out / "report.csv"
    write_report_csv(report_rows, report)
    return report


def run_pipeline(cfg: ExperimentConfig) -> Path:
    """File-level pipeline over a simulated corpus: diagrams, censuses, vectors.

    Reads the manifest under ``cfg.out`` (simulating first if absent) and
    writes one diagram CSV, one census CSV, and one vector CSV per sample.
    """
    out = Path(cfg.out)
    manifest = out / "manifest.csv"
    if not manifest.exists():
        run_simulate(cfg)

    with manifest.open(newline="") as fh:
        entries = list(csv.DictReader(fh))

    for sub in ("diagrams", "censuses", "vectors"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    fields = _parallel_map(lambda e: read_field_csv(out / e["path"]), entries, cfg.threads)
    diagrams = _parallel_map(diagram_of_field, fields, cfg.threads)
    censuses = _parallel_map(detect_critical, fields, cfg.threads)

    grids = {}
    for entry, diagram in zip(entries, diagrams):
        if entry["split"] == "train":
            grids.setdefault((entry["eta"], entry["nu"]), []).append(diagram)
    grids = {key: default_grid(ds, cfg.bins) for key, ds in grids.items()}

    for entry, diagram, census in zip(entries, diagrams, censuses):
        rel = Path(entry["path"]).relative_to("fields")
        for sub, writer, obj in (
            ("diagrams", write_diagram_csv, diagram),
            ("censuses", write_census_csv, census),
        ):
            path = out / sub / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            writer(obj, path)
        grid = grids[(entry["eta"], entry["nu"])]
        vec = vectorize(diagram, grid, cfg.depth)
        path = out / "vectors" / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        write_vector_csv(vec, path)
    return out
