"""Command-line entry points.

Subcommands:

* ``learn`` — run the explore/invent/learn loop and write a run directory
  (config echo, per-iteration dataset snapshots, predicate ledger, final
  model, PDDL domain, event log).
* ``eval``  — plan and execute a task file against a saved model.
* ``tasks`` — write the scripted kitchen benchmark task file.
* ``check`` — soundness/consistency/disagreement checks on a run directory.
* ``bound`` — print the sample-complexity bound for given sizes.

Exit codes: 0 success, 2 configuration error, 3 annotator (oracle) error,
4 environment error.  A JSON config file may supply any long flag value
(dashes as underscores); explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import random
import statistics
import sys
from typing import Any, Mapping, Sequence

import httpx

from .core import (
    AbstractionCache,
    ClassifierError,
    ConfigurationError,
    Dataset,
    InapplicableOperatorError,
    Model,
    SkillInstance,
    SymskillError,
)
from .env import (
    KitchenEnv,
    ReplayMissError,
    TranscriptEnv,
    kitchen_task_suite,
    load_transcript,
)
from .explore import (
    PairCountMatrix,
    ScoredSequence,
    chainability,
    collect,
    coverage,
    generate_candidates,
    pareto_select,
    random_candidate,
)
from .invent import invent, reevaluate
from .operators import model_rebuild
from .oracle import FMProposer, ScriptedClassifier, ScriptedOracle, TableClassifier
from .pddl import emit_domain
from .plan import DEFAULT_K, evaluate, load_tasks, save_tasks
from .runio import (
    RunDir,
    canonical_json,
    derive_seed,
    load_model,
    write_text,
)
from .theory import check_consistency, check_soundness, empirical_d_compl, sample_bound

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_ENV = 4

DEFAULTS: dict[str, Any] = {
    "env": "kitchen",
    "oracle": "scripted",
    "noise": 0.0,
    "iterations": 5,
    "batch": 5,
    "steps": 15,
    "threshold": 0.6,
    "budget": 8,
    "seed": 140,
    "explorer": "pareto",
    "extra_precondition_params": False,
    "transcript": None,
    "export_pddl": None,
    "k": DEFAULT_K,
    "repeats": 1,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symskill",
        description="Learn symbolic operator models of black-box skills.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    learn = sub.add_parser("learn", help="run the learning loop")
    learn.add_argument("--config", help="JSON file supplying flag defaults")
    learn.add_argument("--env", choices=["kitchen", "transcript"])
    learn.add_argument("--oracle", choices=["scripted", "fm"])
    learn.add_argument("--noise", type=float, help="scripted-oracle distractor rate")
    learn.add_argument("--iterations", type=int)
    learn.add_argument("--batch", type=int, help="candidate sequences per iteration")
    learn.add_argument("--steps", type=int, help="steps per episode")
    learn.add_argument("--threshold", type=float, help="acceptance score threshold")
    learn.add_argument("--budget", type=int, help="proposals per skill per invent call")
    learn.add_argument("--seed", type=int)
    learn.add_argument("--explorer", choices=["pareto", "random", "first"])
    learn.add_argument(
        "--extra-precondition-params",
        action="store_const",
        const=True,
        default=None,
        help="allow operator parameters that appear only in preconditions",
    )
    learn.add_argument("--transcript", help="transcript path (env=transcript)")
    learn.add_argument("--export-pddl", dest="export_pddl",
                       help="also write the domain to this path")
    learn.add_argument("--out", required=True, help="run directory")

    ev = sub.add_parser("eval", help="plan and execute tasks against a model")
    ev.add_argument("--config", help="JSON file supplying flag defaults")
    ev.add_argument("--model", required=True, help="model.json path")
    ev.add_argument("--tasks", required=True, help="task file (JSON)")
    ev.add_argument("--out", required=True, help="report directory")
    ev.add_argument("--k", type=int, help="plans to try per task")
    ev.add_argument("--repeats", type=int)
    ev.add_argument("--seed", type=int)

    tasks = sub.add_parser("tasks", help="write the kitchen benchmark tasks")
    tasks.add_argument("--out", required=True, help="task file to write")

    check = sub.add_parser("check", help="soundness/consistency checks on a run")
    check.add_argument("--run", required=True, help="run directory from learn")

    bound = sub.add_parser("bound", help="print the sample-complexity bound")
    bound.add_argument("--epsilon", type=float, required=True)
    bound.add_argument("--delta", type=float, required=True)
    bound.add_argument("--p-max", type=int, required=True)
    bound.add_argument("--omega", type=int, required=True)
    bound.add_argument("--objects", type=int, required=True)
    bound.add_argument("--mu", type=int, required=True)
    return parser


def resolve_settings(args: argparse.Namespace) -> dict[str, Any]:
    """DEFAULTS <- config file <- explicit flags."""
    settings = dict(DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {config_path}: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a JSON object")
        for key, value in loaded.items():
            norm = key.replace("-", "_")
            if norm not in settings:
                raise ConfigurationError(f"unknown config key {key!r}")
            settings[norm] = value
    for key in settings:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    return settings


def _validate_learn(s: Mapping[str, Any]) -> None:
    if s["iterations"] < 1 or s["batch"] < 1 or s["steps"] < 1:
        raise ConfigurationError("iterations, batch, and steps must be >= 1")
    if not 0.0 <= float(s["noise"]) <= 1.0:
        raise ConfigurationError("noise must be in [0, 1]")
    if not 0.0 <= float(s["threshold"]) <= 1.0:
        raise ConfigurationError("threshold must be in [0, 1]")
    if s["budget"] < 1:
        raise ConfigurationError("budget must be >= 1")
    if s["env"] == "transcript" and not s["transcript"]:
        raise ConfigurationError("env=transcript requires --transcript")


def _replay_episode(env: TranscriptEnv):
    nxt = env.upcoming()
    if nxt is None:
        return None
    env.reset()
    episode = nxt.episode
    out = []
    while True:
        nxt = env.upcoming()
        if nxt is None or nxt.episode != episode:
            break
        out.append(env.execute(nxt.instance))
    return out


def _choose_episode(
    env: KitchenEnv,
    model: Model,
    dataset: Dataset,
    cache: AbstractionCache,
    s: Mapping[str, Any],
    iteration: int,
) -> tuple[SkillInstance, ...]:
    rng = random.Random(derive_seed(int(s["seed"]), f"explore:{iteration}"))
    matrix = PairCountMatrix.from_dataset(dataset)
    explorer = s["explorer"]
    if explorer == "random":
        return random_candidate(env, rng, int(s["steps"]))
    batch = 1 if explorer == "first" else int(s["batch"])
    class_counts: dict[tuple[str, bool], int] = {}
    for t in dataset.transitions():
        key = (t.instance.skill.name, t.success)
        class_counts[key] = class_counts.get(key, 0) + 1
    candidates = generate_candidates(
        env,
        matrix,
        rng,
        batch,
        int(s["steps"]),
        model=model,
        class_counts=class_counts,
    )
    if explorer == "first":
        return candidates[0]
    objects = env.object_list()
    init = cache.abstract(env.initial_state().handle(), model.predicates)
    scored = [
        ScoredSequence(
            index=j,
            instances=c,
            coverage=coverage(matrix, c),
            chainability=chainability(model, c, init, objects),
        )
        for j, c in enumerate(candidates)
    ]
    return pareto_select(scored).instances


def run_learn(s: Mapping[str, Any], out_dir: str) -> None:
    _validate_learn(s)
    if s["env"] == "kitchen":
        env: KitchenEnv | TranscriptEnv = KitchenEnv()
        classifier = ScriptedClassifier()
    else:
        env = load_transcript(str(s["transcript"]))
        classifier = TableClassifier(env.verdicts)
    hierarchy = env.hierarchy
    objects = env.object_list()
    cache = AbstractionCache(classifier, objects)
    if s["oracle"] == "scripted":
        proposer = ScriptedOracle(
            noise=float(s["noise"]),
            seed=derive_seed(int(s["seed"]), "oracle"),
            classifier=classifier,
        )
    else:
        proposer = FMProposer(known_types=sorted(hierarchy.types))

    rundir = RunDir(out_dir)
    rundir.write_config({k: s[k] for k in sorted(DEFAULTS)})
    model = Model.empty()
    dataset = Dataset()
    epp = bool(s["extra_precondition_params"])
    ledger: list[dict] = []

    for iteration in range(int(s["iterations"])):
        if isinstance(env, TranscriptEnv):
            episode = _replay_episode(env)
            if episode is None:
                rundir.event({"iteration": iteration, "event": "transcript_end"})
                break
            dataset.adopt_episode(episode)
        else:
            chosen = _choose_episode(env, model, dataset, cache, s, iteration)
            collect(env, chosen, dataset)

        model, invent_events = invent(
            model,
            dataset,
            cache,
            hierarchy,
            proposer,
            threshold=float(s["threshold"]),
            budget=int(s["budget"]),
            extra_precondition_params=epp,
        )
        model, prune_events = reevaluate(model, dataset, cache, hierarchy, epp)
        model = model_rebuild(model, dataset, cache, hierarchy, epp)

        for event in invent_events + prune_events:
            row = {"iteration": iteration, **event}
            ledger.append(row)
            rundir.event(row)
        rundir.write_iteration_snapshot(iteration, dataset)
        rundir.event(
            {
                "iteration": iteration,
                "event": "iteration_done",
                "transitions": len(dataset),
                "predicates": len(model.predicates),
                "operators": len(model.operators),
            }
        )

    domain_text = emit_domain(model, hierarchy, name=f"symskill_{s['env']}")
    rundir.write_model(model)
    rundir.write_domain(domain_text)
    rundir.write_ledger(ledger)
    rundir.write_report(
        {
            "transitions": len(dataset),
            "episodes": len(dataset.episodes),
            "predicates": sorted(p.name for p in model.predicates),
            "operators": [op.name for op in model.operators],
            "rejected": {
                k: sorted(v) for k, v in sorted(model.rejected.items())
            },
        }
    )
    if s.get("export_pddl"):
        write_text(str(s["export_pddl"]), domain_text)


def run_eval(s: Mapping[str, Any], model_path: str, tasks_path: str, out_dir: str) -> None:
    repeats = int(s["repeats"])
    if repeats < 1:
        raise ConfigurationError("repeats must be >= 1")
    k = int(s["k"])
    model = load_model(model_path)
    tasks = load_tasks(tasks_path)
    rundir = RunDir(out_dir)
    runs = []
    for _ in range(repeats):
        env = KitchenEnv()
        report = evaluate(env, model, ScriptedClassifier(), tasks, k=k)
        runs.append(report)

    tags = sorted({t.tag for t in tasks})
    aggregates: dict[str, dict[str, float]] = {}
    for tag in tags:
        solved = [r.solved_rate(tag) for r in runs]
        pbs = [r.mean_pb(tag) for r in runs]
        aggregates[tag] = {
            "solved_rate_mean": statistics.fmean(solved),
            "solved_rate_std": statistics.pstdev(solved) if len(solved) > 1 else 0.0,
            "mean_pb_mean": statistics.fmean(pbs),
            "mean_pb_std": statistics.pstdev(pbs) if len(pbs) > 1 else 0.0,
        }
    payload = {
        "repeats": repeats,
        "k": k,
        "runs": [r.to_dict() for r in runs],
        "aggregates": aggregates,
    }
    rundir.write_report(payload)

    lines = []
    for result in runs[0].tasks:
        lines.append(
            f"{result.name} [{result.tag}]: "
            f"{'solved' if result.solved else 'failed'} "
            f"plans_tried={result.plans_tried} found={result.plans_found}"
        )
    for tag in tags:
        agg = aggregates[tag]
        lines.append(
            f"{tag}: solved {agg['solved_rate_mean']:.1%} "
            f"+/- {agg['solved_rate_std']:.1%}, "
            f"mean plans tried {agg['mean_pb_mean']:.2f} "
            f"+/- {agg['mean_pb_std']:.2f}"
        )
    write_text(rundir.path("report.txt"), "\n".join(lines) + ("\n" if lines else ""))


def _replay_snapshot(path: str, env: KitchenEnv) -> Dataset:
    """Rebuild a dataset by re-executing a snapshot; ids must match."""
    with open(path, "r", encoding="utf-8") as fh:
        rows = [json.loads(ln) for ln in fh.read().splitlines() if ln.strip()]
    dataset = Dataset()
    by_episode: dict[int, list[dict]] = {}
    for row in rows:
        by_episode.setdefault(row["episode"], []).append(row)
    for episode in sorted(by_episode):
        env.reset()
        replayed = []
        for row in sorted(by_episode[episode], key=lambda r: r["step"]):
            instance = SkillInstance(
                skill=env.skills[row["skill"]],
                arguments=tuple(env.object_named(a) for a in row["args"]),
            )
            t = env.execute(instance)
            if t.success != row["success"] or t.after.id != row["after"]:
                raise ConfigurationError(
                    f"snapshot {path} does not replay: step {row['tid']} diverged"
                )
            replayed.append(t)
        dataset.adopt_episode(replayed)
    return dataset


def run_check(run_dir: str) -> None:
    import glob
    import os

    model = load_model(os.path.join(run_dir, "model.json"))
    snapshots = sorted(glob.glob(os.path.join(run_dir, "dataset_iter_*.jsonl")))
    if not snapshots:
        raise ConfigurationError(f"no dataset snapshots under {run_dir}")
    env = KitchenEnv()
    dataset = _replay_snapshot(snapshots[-1], env)
    cache = AbstractionCache(ScriptedClassifier(), env.object_list())
    violations = check_soundness(model, dataset, cache)
    consistency = check_consistency(model, dataset, cache)
    disagreement = empirical_d_compl(model, dataset, cache)
    payload = {
        "sound": not violations,
        "soundness_violations": violations,
        "consistency": consistency.to_dict(),
        "empirical_disagreement": disagreement,
    }
    sys.stdout.write(canonical_json(payload))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "learn":
            run_learn(resolve_settings(args), args.out)
        elif args.command == "eval":
            run_eval(resolve_settings(args), args.model, args.tasks, args.out)
        elif args.command == "tasks":
            save_tasks(args.out, kitchen_task_suite())
        elif args.command == "check":
            run_check(args.run)
        elif args.command == "bound":
            result = sample_bound(
                epsilon=args.epsilon,
                delta=args.delta,
                p_max=args.p_max,
                omega_count=args.omega,
                object_count=args.objects,
                mu_max=args.mu,
            )
            sys.stdout.write(canonical_json(result.to_dict()))
    except ConfigurationError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except (ClassifierError, httpx.HTTPError) as exc:
        sys.stderr.write(f"oracle error: {exc}\n")
        return EXIT_ORACLE
    except (ReplayMissError, InapplicableOperatorError) as exc:
        sys.stderr.write(f"environment error: {exc}\n")
        return EXIT_ENV
    except (OSError, json.JSONDecodeError, ValueError, SymskillError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
