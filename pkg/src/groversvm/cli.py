"""Command-line harness: dataset generation, learner runs, sweeps, and reports.

Configuration is a key-value text file (``key = value`` lines, ``#``
comments) overridden by repeatable ``--set key=value`` flags and finally by
dedicated flags; flags win.  Every emitted artifact starts with a schema
line and is byte-identical for identical (config, seed) pairs: no
timestamps, no wall-clock entropy, deterministic ordering throughout.

Exit codes: 0 success, 2 invalid configuration, 3 resource cap exceeded,
4 domain failure (e.g. a pattern that never occurs).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .errors import ResourceCapError, StructuralError
from .grover import GroverConfig, IndicatorOracle
from .learn import (
    Concept,
    LEARNER_KINDS,
    classical_learner,
    complexity_sweep,
    default_interval_width,
    default_shots,
    generate_balanced_test,
    generate_dataset,
    loglog_slope,
    preprocessing_learner,
    quantum_kernel_learner,
)
from .pattern import TextInstance, kmp_search, pattern_label, pattern_match, random_instance
from . import sim

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_DOMAIN = 4

REPORT_SCHEMA = "groversvm-report/1"
DATASET_SCHEMA = "groversvm-dataset/1"
SWEEP_SCHEMA = "groversvm-sweep/1"

WORKERS_ENV = "GROVERSVM_WORKERS"


class ConfigError(Exception):
    """Invalid or incomplete experiment configuration."""


@dataclass
class ExperimentConfig:
    problem: str = "indicator"
    domain_size: int = 1024
    interval_width: str = "auto"
    train_size: int = 16
    shots: str = "auto"
    box_bound: float = 100.0
    backend: str = "ideal"
    learner: str = "quantum_kernel"
    trials: int = 10
    seed: int | None = None
    concept_start: str = "random"
    test_size: int = 200
    budget: str = "auto"
    domain_sizes: str = ""
    pattern: str = "110"
    label_rule: str = "halfspace"


_INT_KEYS = {"domain_size", "train_size", "trials", "seed", "test_size"}
_FLOAT_KEYS = {"box_bound"}
_CHOICE_KEYS = {
    "problem": ("indicator", "pattern"),
    "backend": ("ideal", "faithful"),
    "learner": LEARNER_KINDS,
    "label_rule": ("halfspace", "log_width"),
}


def _coerce(key: str, value: str):
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
    if key in _FLOAT_KEYS:
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"{key} must be a number, got {value!r}") from exc
    if key in _CHOICE_KEYS and value not in _CHOICE_KEYS[key]:
        raise ConfigError(f"{key} must be one of {_CHOICE_KEYS[key]}, got {value!r}")
    return value


def parse_config_file(path: str) -> dict:
    pairs = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            pairs[key] = value
    return pairs


def build_config(file_pairs: dict, set_pairs: list[str], flag_overrides: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    config = ExperimentConfig()
    merged: dict[str, str] = dict(file_pairs)
    for item in set_pairs or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        merged[key] = value
    for key, value in merged.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(config, key, _coerce(key, value))
    for key, value in flag_overrides.items():
        if value is not None:
            setattr(config, key, _coerce(key, str(value)))
    return config


def _is_power_of_two(value: int) -> bool:
    return value >= 1 and (value & (value - 1)) == 0


def _as_int(key: str, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be an integer or 'auto', got {value!r}") from exc


@dataclass(frozen=True)
class ResolvedConfig:
    """Config with every 'auto' materialized; echoed verbatim into reports."""

    problem: str
    domain_size: int
    interval_width: int
    train_size: int
    shots: int
    box_bound: float
    backend: str
    learner: str
    trials: int
    seed: int
    concept_start: str
    test_size: int
    budget: int
    pattern: str
    label_rule: str

    def as_pairs(self) -> list[tuple[str, str]]:
        values = [
            ("problem", self.problem),
            ("domain_size", self.domain_size),
            ("interval_width", self.interval_width),
            ("train_size", self.train_size),
            ("shots", self.shots),
            ("box_bound", f"{self.box_bound:g}"),
            ("backend", self.backend),
            ("learner", self.learner),
            ("trials", self.trials),
            ("seed", self.seed),
            ("concept_start", self.concept_start),
            ("test_size", self.test_size),
            ("budget", self.budget),
            ("pattern", self.pattern),
            ("label_rule", self.label_rule),
        ]
        return [(key, str(value)) for key, value in values]


def resolve_config(config: ExperimentConfig) -> ResolvedConfig:
    if config.seed is None:
        raise ConfigError("seed is mandatory; set it in the config file or with --seed")
    N = config.domain_size
    if not _is_power_of_two(N) or N < 8:
        raise ConfigError("domain_size must be a power of two, at least 8")
    m = config.train_size
    if not 2 <= m <= N:
        raise ConfigError("train_size must lie in [2, domain_size]")
    if str(config.interval_width) == "auto":
        M = default_interval_width(m, N)
    else:
        M = _as_int("interval_width", config.interval_width)
        if not _is_power_of_two(M) or not 1 <= M < N // 2:
            raise ConfigError("interval_width must be a power of two in [1, N/2)")
    if str(config.shots) == "auto":
        R = default_shots(m)
    else:
        R = _as_int("shots", config.shots)
        if R < 1:
            raise ConfigError("shots must be at least 1")
    if str(config.budget) == "auto":
        X = N // 2
    else:
        X = _as_int("budget", config.budget)
        if not 0 <= X <= N:
            raise ConfigError("budget must lie in [0, N]")
    if config.concept_start != "random":
        start = _as_int("concept_start", config.concept_start)
        if not 0 <= start < N // 2:
            raise ConfigError("concept_start must lie in [0, N/2) or be 'random'")
    if config.box_bound <= 0:
        raise ConfigError("box_bound must be positive")
    if config.trials < 1 or config.test_size < 2 or config.test_size % 2:
        raise ConfigError("trials must be >= 1 and test_size an even number >= 2")
    if any(ch not in "01" for ch in config.pattern) or not config.pattern:
        raise ConfigError("pattern must be a nonempty binary string")
    return ResolvedConfig(
        problem=config.problem,
        domain_size=N,
        interval_width=M,
        train_size=m,
        shots=R,
        box_bound=float(config.box_bound),
        backend=config.backend,
        learner=config.learner,
        trials=config.trials,
        seed=int(config.seed),
        concept_start=str(config.concept_start),
        test_size=config.test_size,
        budget=X,
        pattern=config.pattern,
        label_rule=config.label_rule,
    )


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([p & 0xFFFFFFFF for p in parts]).generate_state(1)[0])


def _concept_for_trial(resolved: ResolvedConfig, trial: int) -> Concept:
    N = resolved.domain_size
    if resolved.concept_start == "random":
        rng = np.random.default_rng(_derived_seed(resolved.seed, trial, 11))
        start = int(rng.integers(0, N // 2))
    else:
        start = int(resolved.concept_start)
    return Concept(start, N)


def run_single_trial(resolved: ResolvedConfig, trial: int) -> dict:
    """Execute one seeded trial; returns a flat record for the report."""
    concept = _concept_for_trial(resolved, trial)
    config = GroverConfig(backend=resolved.backend)
    dataset = generate_dataset(concept, resolved.train_size, _derived_seed(resolved.seed, trial, 23))
    test_oracles, test_labels = generate_balanced_test(
        concept, resolved.test_size, _derived_seed(resolved.seed, trial, 37)
    )
    learner_seed = _derived_seed(resolved.seed, trial, 53)
    try:
        if resolved.learner == "quantum_kernel":
            result = quantum_kernel_learner(
                dataset,
                test_oracles,
                resolved.interval_width,
                resolved.shots,
                resolved.box_bound,
                config,
                rng_seed=learner_seed,
            )
        elif resolved.learner == "preprocessing":
            result = preprocessing_learner(
                dataset,
                test_oracles,
                resolved.interval_width,
                resolved.box_bound,
                config,
                rng_seed=learner_seed,
            )
        else:
            result = classical_learner(concept, test_oracles, resolved.budget, learner_seed)
    except ResourceCapError as exc:
        return {"trial": trial, "status": f"resource_cap:{exc}", "accuracy": float("nan")}
    ledger = result.ledger
    return {
        "trial": trial,
        "status": "ok",
        "accuracy": result.accuracy(test_labels),
        "support_count": result.support_count,
        "oracle_queries": ledger.oracle_queries,
        "shots": ledger.shots,
        "classical_evaluations": ledger.classical_evaluations,
    }


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    return max(1, count)


def _run_trials(resolved: ResolvedConfig) -> list[dict]:
    workers = _worker_count()
    indices = list(range(resolved.trials))
    if workers == 1:
        records = [run_single_trial(resolved, t) for t in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_single_trial, [resolved] * len(indices), indices))
    return sorted(records, key=lambda rec: rec["trial"])


def format_run_report(resolved: ResolvedConfig, records: list[dict]) -> str:
    lines = [f"schema {REPORT_SCHEMA}", f"artifact_version {__version__}", "[config]"]
    lines.extend(f"{key} {value}" for key, value in resolved.as_pairs())
    lines.append("[trials]")
    lines.append("# trial status accuracy support_count oracle_queries shots classical_evaluations")
    ok = [rec for rec in records if rec["status"] == "ok"]
    for rec in records:
        if rec["status"] == "ok":
            lines.append(
                f"{rec['trial']} ok {rec['accuracy']:.6f} {rec['support_count']} "
                f"{rec['oracle_queries']} {rec['shots']} {rec['classical_evaluations']}"
            )
        else:
            lines.append(f"{rec['trial']} {rec['status'].split(':', 1)[0]} nan 0 0 0 0")
    lines.append("[summary]")
    lines.append(f"trials {len(records)}")
    lines.append(f"completed {len(ok)}")
    if ok:
        acc = np.array([rec["accuracy"] for rec in ok])
        half = 1.96 * float(acc.std(ddof=1)) / math.sqrt(acc.size) if acc.size > 1 else 0.0
        lines.append(f"mean_accuracy {float(acc.mean()):.6f}")
        lines.append(f"ci95_halfwidth {half:.6f}")
        lines.append(f"frac_accuracy_ge_0.99 {float(np.mean(acc >= 0.99)):.6f}")
        lines.append(f"frac_accuracy_ge_0.95 {float(np.mean(acc >= 0.95)):.6f}")
        for key in ("oracle_queries", "shots", "classical_evaluations"):
            lines.append(f"total_{key} {sum(rec[key] for rec in ok)}")
    return "\n".join(lines) + "\n"


def format_run_csv(records: list[dict]) -> str:
    lines = ["trial,status,accuracy,support_count,oracle_queries,shots,classical_evaluations"]
    for rec in records:
        if rec["status"] == "ok":
            lines.append(
                f"{rec['trial']},ok,{rec['accuracy']:.6f},{rec['support_count']},"
                f"{rec['oracle_queries']},{rec['shots']},{rec['classical_evaluations']}"
            )
        else:
            lines.append(f"{rec['trial']},{rec['status'].split(':', 1)[0]},nan,0,0,0,0")
    return "\n".join(lines) + "\n"


def read_report(path: str) -> dict:
    """Parse a run report, rejecting unknown schema versions."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or not lines[0].startswith("schema "):
        raise StructuralError("missing schema line")
    schema = lines[0].split(" ", 1)[1]
    if schema != REPORT_SCHEMA:
        raise StructuralError(f"unsupported report schema {schema!r}")
    report: dict = {"schema": schema, "config": {}, "trials": [], "summary": {}}
    section = None
    for line in lines[1:]:
        if line.startswith("["):
            section = line.strip("[]")
            continue
        if not line or line.startswith("#"):
            continue
        if section == "config":
            key, value = line.split(" ", 1)
            report["config"][key] = value
        elif section == "trials":
            parts = line.split()
            report["trials"].append(
                {
                    "trial": int(parts[0]),
                    "status": parts[1],
                    "accuracy": float(parts[2]),
                    "support_count": int(parts[3]),
                    "oracle_queries": int(parts[4]),
                    "shots": int(parts[5]),
                    "classical_evaluations": int(parts[6]),
                }
            )
        elif section == "summary":
            key, value = line.split(" ", 1)
            report["summary"][key] = value
        elif section is None:
            key, value = line.split(" ", 1)
            report[key] = value
    return report


def cmd_run(resolved: ResolvedConfig, out_path: str | None) -> int:
    if resolved.problem != "indicator":
        raise ConfigError("run supports problem=indicator; use pattern-demo for texts")
    records = _run_trials(resolved)
    report = format_run_report(resolved, records)
    sys.stdout.write(report)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(report)
        with open(out_path + ".csv", "w", encoding="utf-8") as handle:
            handle.write(format_run_csv(records))
    if not any(rec["status"] == "ok" for rec in records):
        return EXIT_RESOURCE
    return EXIT_OK


def format_dataset_indicator(resolved: ResolvedConfig, concept: Concept, dataset) -> str:
    lines = [
        f"schema {DATASET_SCHEMA}",
        f"artifact_version {__version__}",
        "problem indicator",
        f"domain_size {resolved.domain_size}",
        f"concept_start {concept.start}",
        f"size {dataset.size}",
        "[data]",
        "# marked_index label",
    ]
    for oracle, label in zip(dataset.oracles, dataset.labels):
        lines.append(f"{oracle.marked} {'+1' if label > 0 else '-1'}")
    return "\n".join(lines) + "\n"


def format_dataset_pattern(resolved: ResolvedConfig, start: int, instances, labels) -> str:
    lines = [
        f"schema {DATASET_SCHEMA}",
        f"artifact_version {__version__}",
        "problem pattern",
        f"domain_size {resolved.domain_size}",
        f"pattern {resolved.pattern}",
        f"label_rule {resolved.label_rule}",
        f"concept_start {start}",
        f"size {len(instances)}",
        "[data]",
        "# text location label",
    ]
    for inst, label in zip(instances, labels):
        text = "".join(str(b) for b in inst.text)
        lines.append(f"{text} {inst.location} {'+1' if label > 0 else '-1'}")
    return "\n".join(lines) + "\n"


def read_dataset(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or not lines[0].startswith("schema "):
        raise StructuralError("missing schema line")
    schema = lines[0].split(" ", 1)[1]
    if schema != DATASET_SCHEMA:
        raise StructuralError(f"unsupported dataset schema {schema!r}")
    header: dict = {"schema": schema}
    rows = []
    in_data = False
    for line in lines[1:]:
        if line == "[data]":
            in_data = True
            continue
        if not line or line.startswith("#"):
            continue
        if in_data:
            rows.append(line.split())
        else:
            key, value = line.split(" ", 1)
            header[key] = value
    header["rows"] = rows
    return header


def cmd_gen_data(resolved: ResolvedConfig, out_path: str | None) -> int:
    if resolved.concept_start == "random":
        rng = np.random.default_rng(_derived_seed(resolved.seed, 0, 11))
        start = int(rng.integers(0, resolved.domain_size // 2))
    else:
        start = int(resolved.concept_start)
    if resolved.problem == "indicator":
        concept = Concept(start, resolved.domain_size)
        dataset = generate_dataset(
            concept, resolved.train_size, _derived_seed(resolved.seed, 0, 23)
        )
        payload = format_dataset_indicator(resolved, concept, dataset)
    else:
        N = resolved.domain_size
        if len(resolved.pattern) > N:
            raise ConfigError("pattern longer than the text length")
        rng = np.random.default_rng(_derived_seed(resolved.seed, 0, 29))
        instances, labels = [], []
        for _ in range(resolved.train_size):
            location = int(rng.integers(0, N))
            inst = random_instance(N, resolved.pattern, location, rng)
            instances.append(inst)
            labels.append(pattern_label(start, inst.location, N, resolved.label_rule))
        payload = format_dataset_pattern(resolved, start, instances, labels)
    sys.stdout.write(payload)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(payload)
    return EXIT_OK


def format_sweep(rows_by_learner: dict, slopes: dict) -> str:
    lines = [f"schema {SWEEP_SCHEMA}", f"artifact_version {__version__}", "[rows]"]
    lines.append("learner,domain_size,mean_queries_per_classification,mean_support_count")
    for learner in sorted(rows_by_learner):
        for row in rows_by_learner[learner]:
            lines.append(
                f"{learner},{row.domain_size},{row.mean_queries_per_classification:.4f},"
                f"{row.mean_support_count:.4f}"
            )
    lines.append("[slopes]")
    lines.append("learner,slope,stderr")
    for learner in sorted(slopes):
        slope, err = slopes[learner]
        lines.append(f"{learner},{slope:.4f},{err:.4f}")
    return "\n".join(lines) + "\n"


def cmd_sweep(resolved: ResolvedConfig, domain_sizes: list[int], out_path: str | None,
              trials: int, learner: str | None) -> int:
    if len(domain_sizes) < 4:
        raise ConfigError("sweep needs at least 4 domain sizes")
    learners = [learner] if learner else list(LEARNER_KINDS)
    rows_by_learner: dict = {}
    slopes: dict = {}
    for kind in learners:
        rows = complexity_sweep(kind, domain_sizes, trials, resolved.seed)
        rows_by_learner[kind] = rows
        slope, err = loglog_slope(
            [row.domain_size for row in rows],
            [row.mean_queries_per_classification for row in rows],
        )
        slopes[kind] = (slope, err)
    payload = format_sweep(rows_by_learner, slopes)
    sys.stdout.write(payload)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(payload)
    return EXIT_OK


def cmd_pattern_demo(
    text_path: str, pattern: str, backend: str, rng_seed: int, out_path: str | None
) -> int:
    if not pattern or any(ch not in "01" for ch in pattern):
        raise ConfigError("pattern must be a nonempty binary string")
    with open(text_path, "r", encoding="utf-8") as handle:
        texts = [line.strip() for line in handle if line.strip()]
    if not texts:
        raise ConfigError(f"{text_path} contains no text lines")
    lines = [
        "# line status location success_prob repetitions rounds gate_steps "
        "kmp_location kmp_comparisons"
    ]
    any_failure = False
    max_repetitions = 32
    for i, text in enumerate(texts):
        if any(ch not in "01" for ch in text):
            raise ConfigError(f"line {i}: texts must be binary strings")
        kmp_loc, kmp_ledger = kmp_search(text, pattern)
        try:
            instance = TextInstance(text, pattern)
        except StructuralError:
            any_failure = True
            loc = "none" if kmp_loc is None else str(kmp_loc)
            lines.append(
                f"{i} no-unique-match {loc} nan 0 0 0 {loc} "
                f"{kmp_ledger.classical_char_comparisons}"
            )
            continue
        config = GroverConfig(backend=backend if instance.total_qubits <= sim.QUBIT_CAP else "ideal")
        # Measure, verify the candidate classically, retry on a miss.
        N, L = instance.text_length, instance.pattern_length
        found, prob, ledger, repetitions = None, 0.0, None, 0
        for attempt in range(max_repetitions):
            candidate, prob, ledger = pattern_match(instance, config, rng_seed + 1009 * i + attempt)
            repetitions += 1
            window = instance.text[(candidate + np.arange(L)) % N]
            if np.array_equal(window, instance.pattern):
                found = candidate
                break
        if found is None:
            any_failure = True
            lines.append(
                f"{i} measure-failure none {prob:.6f} {repetitions} "
                f"{ledger.amplification_rounds} {ledger.gate_steps} "
                f"{kmp_loc} {kmp_ledger.classical_char_comparisons}"
            )
            continue
        lines.append(
            f"{i} ok {found} {prob:.6f} {repetitions} {ledger.amplification_rounds} "
            f"{ledger.gate_steps} {kmp_loc} {kmp_ledger.classical_char_comparisons}"
        )
    payload = "\n".join(lines) + "\n"
    sys.stdout.write(payload)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(payload)
    return EXIT_DOMAIN if any_failure else EXIT_OK


def _selftest_checks():
    import numpy.testing as npt

    from .grover import (
        adder_circuit,
        feature_map_circuit,
        grover_success_probability,
        interval_state_analytic,
        theoretical_success_probability,
    )
    from .kernel import kernel_circuit, kernel_exact
    from .learn import halfspace_overlap
    from .svm import decide, train

    def check_hadamard():
        state = sim.apply(sim.StateVector.zero(1), sim.hadamard(0))
        npt.assert_allclose(state.amplitudes, [2**-0.5, 2**-0.5], atol=1e-12)

    def check_adder():
        circuit = adder_circuit(3)
        for i in range(8):
            for j in range(8):
                out = sim.run(circuit, sim.StateVector.basis(6, i + 8 * j))
                expected = ((i + j) % 8) + 8 * j
                assert abs(out.amplitudes[expected] - 1.0) < 1e-12, (i, j)

    def check_grover():
        simulated = grover_success_probability(8, marked=5)
        assert abs(simulated - theoretical_success_probability(8)) < 1e-9

    def check_feature_map():
        oracle = IndicatorOracle(16, 2)
        state = sim.run_from_zero(feature_map_circuit(oracle, 4))
        target = interval_state_analytic(2, 4, 16)
        fid = sim.subsystem_fidelity(state, range(4), target.amplitudes)
        assert abs(fid - 1.0) < 1e-9
        assert abs(sim.prob_all_zero(state, range(4, 8)) - 1.0) < 1e-9

    def check_kernel():
        value, _ = kernel_circuit(IndicatorOracle(16, 3), IndicatorOracle(16, 5), 4)
        assert abs(value - kernel_exact(3, 5, 4, 16)) < 1e-10

    def check_svm():
        model = train(np.array([[1.0, 0.5], [0.5, 1.0]]), [1, -1], box_bound=10.0)
        npt.assert_allclose(model.dual_coeffs, [2.0, 2.0], atol=1e-6)
        assert abs(model.bias) < 1e-6
        assert decide(model, [1.0, 0.5])[1] == 1

    def check_halfspace():
        assert abs(halfspace_overlap(0, 3, 2, 16) - 0.25) < 1e-12
        assert halfspace_overlap(0, 10, 2, 16) == 0.0

    def check_pattern():
        instance = TextInstance("10110010", "110")
        found, prob, _ = pattern_match(instance, GroverConfig(backend="faithful"), 7)
        assert abs(prob - theoretical_success_probability(8, iterations=2)) < 1e-9
        kmp_loc, _ = kmp_search("10110010", "110")
        assert kmp_loc == instance.location == 2

    return [
        ("hadamard", check_hadamard),
        ("adder", check_adder),
        ("grover-success", check_grover),
        ("feature-map", check_feature_map),
        ("kernel-agreement", check_kernel),
        ("svm-two-point", check_svm),
        ("halfspace-overlap", check_halfspace),
        ("pattern-match", check_pattern),
    ]


def cmd_selftest() -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            print(f"FAIL - {name}: {exc}")
        else:
            print(f"ok - {name}")
    if failures:
        print(f"{failures} selftest check(s) failed")
        return 1
    print("all selftest checks passed")
    return EXIT_OK


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="path to a key = value configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--seed", type=int, help="experiment seed (mandatory somewhere)")
    parser.add_argument("--out", help="write the artifact to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groversvm",
        description="Search-subroutine quantum kernels, learners, and query benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"groversvm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="write a labeled dataset file")
    _add_common_flags(gen)

    run = sub.add_parser("run", help="run a learner over seeded trials")
    _add_common_flags(run)
    run.add_argument("--learner", choices=LEARNER_KINDS)
    run.add_argument("--backend", choices=("ideal", "faithful"))
    run.add_argument("--trials", type=int)

    sweep = sub.add_parser("sweep", help="query-complexity scaling across domain sizes")
    _add_common_flags(sweep)
    sweep.add_argument("--learner", choices=LEARNER_KINDS)
    sweep.add_argument("--trials", type=int, default=3)
    sweep.add_argument(
        "--domain-sizes",
        help="comma-separated powers of two (overrides the config key)",
    )

    demo = sub.add_parser("pattern-demo", help="match a pattern against text lines")
    demo.add_argument("text_file", help="newline-separated binary strings")
    demo.add_argument("--pattern", required=True)
    demo.add_argument("--backend", choices=("ideal", "faithful"), default="faithful")
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--out")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


def _config_from_args(args, extra: dict | None = None) -> ExperimentConfig:
    file_pairs = parse_config_file(args.config) if args.config else {}
    overrides = {"seed": getattr(args, "seed", None)}
    overrides.update(extra or {})
    return build_config(file_pairs, args.set, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return cmd_selftest()
        if args.command == "pattern-demo":
            return cmd_pattern_demo(args.text_file, args.pattern, args.backend,
                                    args.seed, args.out)
        if args.command == "gen-data":
            resolved = resolve_config(_config_from_args(args))
            return cmd_gen_data(resolved, args.out)
        if args.command == "run":
            config = _config_from_args(
                args, {"learner": args.learner, "backend": args.backend, "trials": args.trials}
            )
            return cmd_run(resolve_config(config), args.out)
        if args.command == "sweep":
            config = _config_from_args(args, {"learner": None})
            resolved_sizes = args.domain_sizes
            if resolved_sizes is None:
                resolved_sizes = build_config(
                    parse_config_file(args.config) if args.config else {}, args.set, {}
                ).domain_sizes
            if not resolved_sizes:
                raise ConfigError("sweep requires --domain-sizes or the domain_sizes key")
            sizes = [int(part) for part in str(resolved_sizes).split(",") if part.strip()]
            return cmd_sweep(resolve_config(config), sizes, args.out, args.trials, args.learner)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, FileNotFoundError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
