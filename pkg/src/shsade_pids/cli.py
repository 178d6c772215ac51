"""Command-line experiment harness.

``run`` executes a seeded experiment described by a JSON config and writes
one trace CSV per seed plus a summary JSON; ``compare`` aligns two trace
directories on evaluation checkpoints and reports which median dominates;
``oracle`` dumps the brute-force ranking of a surrogate space.

Exit codes: 0 success, 1 config/validation error, 2 runtime failure (with
partial outputs removed).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import baselines, nas_search, objectives, shsade
from .discrete_codec import DiscreteSpace
from .trace import SearchTrace, TraceError

OUTPUT_ROOT_ENV = "SHSADE_PIDS_OUTPUT_ROOT"
DEFAULT_COMPARE_STEP = 25

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class ConfigError(ValueError):
    """Raised for any malformed or inconsistent experiment configuration."""


def config_hash(raw_config: dict) -> str:
    canonical = json.dumps(raw_config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _load_json(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None


def _midpoint_genotype(space: DiscreteSpace):
    return space.genotype_from_indices([(a.size - 1) // 2 for a in space.axes])


def _resolve_biobjective(raw: dict, surrogate) -> nas_search.BiObjectiveConfig:
    omega = raw.get("omega", 1.0)
    _require(isinstance(omega, (int, float)) and omega >= 0, "biobjective.omega must be >= 0")
    cost_budget = raw.get("cost_budget")
    if cost_budget is None:
        # default reference cost: the mid-grid architecture
        cost_budget = surrogate.predict_cost(_midpoint_genotype(surrogate.space))
    _require(
        isinstance(cost_budget, (int, float)) and cost_budget > 0,
        "biobjective.cost_budget must be positive",
    )
    return nas_search.BiObjectiveConfig(cost_budget=float(cost_budget), omega=float(omega))


def validate_config(raw: dict, base_dir: Path) -> dict:
    """Check and normalize an experiment config without touching the filesystem
    for output; referenced input files are loaded here so a broken reference
    fails before anything is written."""
    _require(isinstance(raw, dict), "config must be a JSON object")
    task = raw.get("task")
    _require(task in ("benchmark", "nas"), "task must be 'benchmark' or 'nas'")
    algorithm = raw.get("algorithm")
    seeds = raw.get("seeds")
    _require(isinstance(seeds, list) and seeds, "seeds must be a non-empty list")
    _require(all(isinstance(s, int) for s in seeds), "seeds must be integers")
    _require(len(set(seeds)) == len(seeds), "seeds must be duplicate-free")
    output = raw.get("output")
    _require(isinstance(output, str) and output, "output must be a non-empty path string")
    algo_cfg = raw.get("algorithm_config", {})
    _require(isinstance(algo_cfg, dict), "algorithm_config must be an object")

    normalized = {
        "task": task,
        "algorithm": algorithm,
        "seeds": [int(s) for s in seeds],
        "output": output,
        "algorithm_config": dict(algo_cfg),
        "hash": config_hash(raw),
    }

    if task == "benchmark":
        _require(
            algorithm in ("shsade", "vanilla_de"),
            "benchmark task supports algorithms 'shsade' and 'vanilla_de'",
        )
        objective = raw.get("objective")
        _require(
            isinstance(objective, dict) and "name" in objective and "dimension" in objective,
            "benchmark task needs objective {'name', 'dimension'}",
        )
        try:
            bench = objectives.make_benchmark(str(objective["name"]), int(objective["dimension"]))
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        normalized["benchmark"] = bench
    else:
        _require(
            algorithm in ("shsade", "regularized_ea"),
            "nas task supports algorithms 'shsade' and 'regularized_ea'",
        )
        space_ref = raw.get("space")
        if isinstance(space_ref, str):
            space_path = Path(space_ref)
            if not space_path.is_absolute():
                space_path = base_dir / space_path
            space_doc = _load_json(space_path)
        elif isinstance(space_ref, dict):
            space_doc = space_ref
        else:
            raise ConfigError("space must be an inline object or a path string")
        try:
            space = DiscreteSpace.from_json_dict(space_doc)
        except ValueError as exc:
            raise ConfigError(f"invalid space document: {exc}") from None
        surrogate_seed = raw.get("surrogate_seed")
        _require(isinstance(surrogate_seed, int), "nas task needs an integer surrogate_seed")
        budget = raw.get("budget", 500)
        _require(isinstance(budget, int) and budget >= 1, "budget must be a positive integer")
        surrogate = objectives.TabularSurrogate(space, surrogate_seed)
        bio_raw = raw.get("biobjective", {})
        _require(isinstance(bio_raw, dict), "biobjective must be an object")
        normalized["space"] = space
        normalized["surrogate"] = surrogate
        normalized["budget"] = budget
        normalized["biobjective"] = _resolve_biobjective(bio_raw, surrogate)

    # constructing the runner validates the algorithm config block up front
    try:
        _build_runner(normalized)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid algorithm_config: {exc}") from None
    return normalized


def _shsade_config(acfg: dict, budget_evals: int | None, crossover_target: str) -> shsade.ShsadeConfig:
    pop_size = int(acfg.get("pop_size", 50))
    max_generations = acfg.get("max_generations")
    if max_generations is None:
        if budget_evals is not None:
            max_generations = max(1, budget_evals // max(pop_size, 1))
        else:
            max_generations = 1000
    keys = (
        "memory_size",
        "p_best_fraction",
        "archive_capacity",
        "learning_period",
        "p_min",
        "strategy_epsilon",
        "memory_learning_rate",
        "freq_init",
        "sigma_gauss_f",
        "sigma_cauchy_f",
        "sigma_cr",
        "f_second_half",
        "use_sinusoidal",
        "use_trigonometric",
    )
    extra = {k: acfg[k] for k in keys if k in acfg}
    return shsade.ShsadeConfig(
        pop_size=pop_size,
        max_generations=int(max_generations),
        crossover_target=crossover_target,
        **extra,
    )


def _build_runner(cfg: dict):
    """Return a callable seed -> (trace, per-seed summary entry)."""
    task = cfg["task"]
    algorithm = cfg["algorithm"]
    acfg = cfg["algorithm_config"]

    if task == "benchmark":
        spec = cfg["benchmark"].to_objective_spec()
        termination = shsade.Termination(
            max_evaluations=acfg.get("max_evaluations"),
            target_fitness=acfg.get("target_fitness"),
        )
        if algorithm == "shsade":
            sh_cfg = _shsade_config(acfg, acfg.get("max_evaluations"), "self")

            def run_seed(seed: int):
                best, trace = shsade.run(sh_cfg, spec, termination, np.random.default_rng(seed))
                entry = {
                    "seed": seed,
                    "final_best": trace.final_best,
                    "evaluations": trace.final_evaluations,
                }
                return trace, entry

        else:
            pop_size = int(acfg.get("pop_size", 50))
            max_generations = acfg.get("max_generations")
            if max_generations is None:
                max_evals = acfg.get("max_evaluations")
                max_generations = max(1, max_evals // pop_size) if max_evals else 1000
            de_cfg = baselines.VanillaDeConfig(
                f=float(acfg.get("f", 0.5)),
                cr=float(acfg.get("cr", 0.9)),
                pop_size=pop_size,
                max_generations=int(max_generations),
            )

            def run_seed(seed: int):
                best, trace = baselines.vanilla_de_run(
                    de_cfg, spec, termination, np.random.default_rng(seed)
                )
                entry = {
                    "seed": seed,
                    "final_best": trace.final_best,
                    "evaluations": trace.final_evaluations,
                }
                return trace, entry

        return run_seed

    space = cfg["space"]
    surrogate = cfg["surrogate"]
    biobjective = cfg["biobjective"]
    budget = cfg["budget"]

    if algorithm == "shsade":
        pop_size = int(acfg.get("pop_size", 50))
        sh_acfg = dict(acfg)
        if "max_generations" not in sh_acfg:
            sh_acfg["max_generations"] = max(10, (10 * budget) // pop_size)
        nas_cfg = nas_search.NasConfig(
            biobjective=biobjective,
            shsade=_shsade_config(sh_acfg, None, "best"),
            budget=budget,
            sigma_init_noise=float(acfg.get("sigma_init_noise", 0.05)),
            sigma_trial_noise=float(acfg.get("sigma_trial_noise", 0.15)),
            mutation_fraction=float(acfg.get("mutation_fraction", 1.0)),
        )

        def run_seed(seed: int):
            best, trace = nas_search.nas_evolve(
                space, surrogate, nas_cfg, np.random.default_rng(seed)
            )
            entry = {
                "seed": seed,
                "final_best": trace.final_best,
                "evaluations": trace.final_evaluations,
                "result": nas_search.result_document(
                    best, trace.final_best, trace.final_evaluations, trace, space
                ),
            }
            return trace, entry

    else:
        ea_cfg = baselines.RegularizedEaConfig(
            population_size=int(acfg.get("population_size", 25)),
            tournament_size=int(acfg.get("tournament_size", 5)),
            budget=budget,
        )

        def run_seed(seed: int):
            best, trace = baselines.regularized_ea_run(
                space, surrogate, ea_cfg, biobjective, np.random.default_rng(seed)
            )
            entry = {
                "seed": seed,
                "final_best": trace.final_best,
                "evaluations": trace.final_evaluations,
                "result": nas_search.result_document(
                    best, trace.final_best, trace.final_evaluations, trace, space
                ),
            }
            return trace, entry

    return run_seed


def resolve_output_dir(output: str) -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "."))
    out = Path(output)
    return out if out.is_absolute() else root / out


def run_experiment(config_path: str, threads: int = 1) -> int:
    config_path = Path(config_path)
    try:
        raw = _load_json(config_path)
        cfg = validate_config(raw, config_path.parent)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    runner = _build_runner(cfg)
    outdir = resolve_output_dir(cfg["output"])
    written: list[Path] = []
    try:
        outdir.mkdir(parents=True, exist_ok=True)

        def run_and_write(seed: int):
            trace, entry = runner(seed)
            trace.metadata.setdefault("algorithm", cfg["algorithm"])
            trace.metadata.update({"seed": str(seed), "config_hash": cfg["hash"]})
            path = outdir / f"trace_seed{seed}.csv"
            trace.write_csv(path)
            return path, entry

        entries = []
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for path, entry in pool.map(run_and_write, cfg["seeds"]):
                    written.append(path)
                    entries.append(entry)
        else:
            for seed in cfg["seeds"]:
                path, entry = run_and_write(seed)
                written.append(path)
                entries.append(entry)

        entries.sort(key=lambda e: cfg["seeds"].index(e["seed"]))
        finals = [e["final_best"] for e in entries]
        summary = {
            "task": cfg["task"],
            "algorithm": cfg["algorithm"],
            "config_hash": cfg["hash"],
            "seeds": cfg["seeds"],
            "per_seed": entries,
            "median_final_best": float(np.median(finals)),
            "iqr_final_best": [
                float(np.percentile(finals, 25)),
                float(np.percentile(finals, 75)),
            ],
        }
        summary_path = outdir / "summary.json"
        summary_path.write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
        )
    except Exception as exc:  # noqa: BLE001 - harness boundary, cleans up and reports
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _load_trace_dir(directory: Path) -> list[SearchTrace]:
    if not directory.is_dir():
        raise ConfigError(f"{directory} is not a directory")
    paths = sorted(directory.glob("trace_*.csv"))
    if not paths:
        raise ConfigError(f"no trace_*.csv files in {directory}")
    return [SearchTrace.read_csv(p) for p in paths]


def compare_traces(dir_a: str, dir_b: str, step: int = DEFAULT_COMPARE_STEP, output: str | None = None) -> int:
    try:
        if step < 1:
            raise ConfigError("checkpoint step must be positive")
        traces_a = _load_trace_dir(Path(dir_a))
        traces_b = _load_trace_dir(Path(dir_b))
        everything = traces_a + traces_b
        start = max(t.rows[0].evaluations for t in everything)
        end = min(t.final_evaluations for t in everything)
        first_checkpoint = ((start + step - 1) // step) * step
        if first_checkpoint > end:
            raise ConfigError("traces share no common evaluation checkpoint")
    except (ConfigError, TraceError) as exc:
        print(f"compare error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    name_a = Path(dir_a).name or "a"
    name_b = Path(dir_b).name or "b"
    if name_a == name_b:
        name_a, name_b = f"{name_a}_a", f"{name_b}_b"

    checkpoints = list(range(first_checkpoint, end + 1, step))
    lines = [f"evaluations,median_{name_a},median_{name_b}"]
    med_a = med_b = None
    for point in checkpoints:
        med_a = float(np.median([t.best_at(point) for t in traces_a]))
        med_b = float(np.median([t.best_at(point) for t in traces_b]))
        lines.append(f"{point},{med_a!r},{med_b!r}")
    csv_text = "\n".join(lines) + "\n"

    if output:
        Path(output).write_text(csv_text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(csv_text)

    if med_a < med_b:
        verdict = name_a
    elif med_b < med_a:
        verdict = name_b
    else:
        verdict = "tie"
    print(f"verdict: {verdict}")
    return EXIT_OK


def dump_oracle(
    space_path: str,
    seed: int,
    omega: float = 1.0,
    cost_budget: float | None = None,
    output: str | None = None,
) -> int:
    try:
        space_doc = _load_json(Path(space_path))
        space = DiscreteSpace.from_json_dict(space_doc)
        surrogate = objectives.TabularSurrogate(space, seed)
        biobjective = _resolve_biobjective(
            {"omega": omega, "cost_budget": cost_budget} if cost_budget else {"omega": omega},
            surrogate,
        )
        _, ranking = nas_search.brute_force_optimum(space, surrogate, biobjective)
    except (ConfigError, ValueError) as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    header = ["rank", "score", "accuracy", "cost"] + [a.name for a in space.axes]
    lines = [",".join(header)]
    for rank, (genotype, value) in enumerate(ranking, start=1):
        accuracy = surrogate.predict_accuracy(genotype)
        cost = surrogate.predict_cost(genotype)
        cells = [str(rank), repr(float(value)), repr(float(accuracy)), repr(float(cost))]
        cells.extend(str(c) for c in genotype.choices)
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="shsade-pids",
        description="Seeded optimizer and architecture-search experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run all seeds of a JSON experiment config")
    p_run.add_argument("config", help="path to the experiment config JSON")
    p_run.add_argument("--threads", type=int, default=1, help="parallel seeds (default 1)")

    p_cmp = sub.add_parser("compare", help="compare two trace directories")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")
    p_cmp.add_argument("--step", type=int, default=DEFAULT_COMPARE_STEP,
                       help=f"evaluation checkpoint spacing (default {DEFAULT_COMPARE_STEP})")
    p_cmp.add_argument("-o", "--output", default=None, help="write the checkpoint CSV here")

    p_orc = sub.add_parser("oracle", help="brute-force ranking of a surrogate space")
    p_orc.add_argument("space", help="path to a space JSON document")
    p_orc.add_argument("--seed", type=int, required=True, help="surrogate seed")
    p_orc.add_argument("--omega", type=float, default=1.0)
    p_orc.add_argument("--cost-budget", type=float, default=None)
    p_orc.add_argument("-o", "--output", default=None, help="write the ranking CSV here")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            code = run_experiment(args.config, threads=args.threads)
        elif args.command == "compare":
            code = compare_traces(args.dir_a, args.dir_b, step=args.step, output=args.output)
        else:
            code = dump_oracle(
                args.space,
                seed=args.seed,
                omega=args.omega,
                cost_budget=args.cost_budget,
                output=args.output,
            )
        sys.stdout.flush()
        return code
    except BrokenPipeError:
        # downstream pipe (e.g. head) closed early; suppress the shutdown noise
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
