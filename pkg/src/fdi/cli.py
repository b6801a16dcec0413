"""``fdi`` command line.

Exit codes: 0 success, 1 configuration or parse error, 2 I/O error,
3 domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import casestudy, eb, io
from .causal import (
    Dag,
    Independence,
    d_separated,
    factorization,
    format_factorization,
    implied_independencies,
)
from .config import RunConfig, load_config
from .errors import ConfigError, FdiError, ParseError
from .forest import Forest
from .fsm import FaultSignatureMatrix
from .maturity import CapabilityProfile, assess, case_study_profiles
from .mb import Thresholds, case_study_fsm, diagnose_trace, segment_activations
from .model import FaultTarget, Label, Trace
from .simulator import simulate


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _config(args) -> RunConfig:
    return load_config(args.config, args.set or (), args.seed)


def _trace_label(cfg: RunConfig) -> Label | None:
    f = cfg.fault
    if f is None:
        return Label.HEALTHY
    if f.target is FaultTarget.R0 and f.factor < 1:
        return Label.R0_DOWN
    if f.target is FaultTarget.ELASTANCE and f.factor > 1:
        return Label.CAP_UP
    return None


def _dataset(cfg: RunConfig, role: int, n_per_class: int) -> list[Trace]:
    return casestudy.labelled_traces(n_per_class, cfg.seed, role, cfg.sigma, params=cfg.params,
                                     schedule=cfg.schedule, cfg=cfg.sim)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    if args.dataset:
        role = casestudy.ROLE_TRAIN if args.dataset == "train" else casestudy.ROLE_VALIDATION
        n = cfg.train_per_class if args.dataset == "train" else cfg.validation_per_class
        traces = _dataset(cfg, role, n)
        io.write_traces(traces, out)
        print(f"wrote {len(traces)} labelled traces to {out}")
        return 0
    trace = simulate(cfg.params, cfg.schedule, cfg.fault, cfg.noise, cfg.sim, label=_trace_label(cfg))
    io.write_traces([trace], out)
    print(f"wrote {len(trace)} samples to {out}")
    if args.computed:
        model = simulate(cfg.params, cfg.schedule, None, None, cfg.sim)
        path = out.with_suffix(".computed.csv")
        io.write_traces([model], path)
        print(f"wrote computed healthy model curve to {path}")
    return 0


def _thresholds(cfg: RunConfig) -> Thresholds:
    if cfg.thresholds is not None:
        return cfg.thresholds
    return casestudy.calibration_thresholds(cfg.params, cfg.sigma, cfg.seed, cfg.calibration_runs,
                                            cfg.calibration_k, cfg.debounce, cfg.schedule, cfg.sim)


def cmd_residuals(args) -> int:
    cfg = _config(args)
    traces = io.read_traces(args.trace)
    if len(traces) != 1:
        raise ParseError(f"{args.trace} holds {len(traces)} traces; residuals takes one")
    trace = traces[0]
    thr = _thresholds(cfg)
    result = diagnose_trace(trace, cfg.params, thr)
    if args.out:
        Path(args.out).write_text(io.residuals_to_csv(result.residuals))
    a1, a2 = result.residuals.activation()
    lines = [f"thresholds: thr1={thr.thr1:.4g} A thr2={thr.thr2:.4g} V debounce={thr.debounce}",
             f"activation: ARR_1={a1} ARR_2={a2}"]
    for t_s, vec in segment_activations(result.residuals, trace):
        lines.append(f"  transition t={t_s:g}: ({vec[0]},{vec[1]})")
    verdict = result.diagnosis.describe()
    if result.r0_estimate is not None:
        verdict += f"; R0 ~= {result.r0_estimate:.4g} ohm"
    if result.tau_estimate is not None:
        verdict += f"; tau ~= {result.tau_estimate:.4g} s (C ~= {result.c_factor:.4g} x nominal)"
    lines.append(verdict)
    lines.extend(result.notes)
    print("\n".join(lines))
    return 0


def _load_dataset(path) -> eb.FeatureMatrix:
    return eb.build_features(io.read_traces(path))


def cmd_train(args) -> int:
    cfg = _config(args)
    fm = _load_dataset(args.dataset)
    forest = eb.train(fm, cfg.forest)
    Path(args.model).write_text(forest.to_text())
    print(f"trained {cfg.forest.n_trees} trees on {len(fm)} rows, classes: {', '.join(forest.classes)}")
    print(f"training accuracy: {eb.accuracy(forest, fm):.6f}")
    return 0


def cmd_classify(args) -> int:
    forest = Forest.from_text(Path(args.model).read_text())
    fm = _load_dataset(args.dataset)
    proba = forest.predict_proba(fm.X)
    pred = [forest.classes[i] for i in np.argmax(proba, axis=1)]
    if args.out:
        header = ["trace", "T", "label", "predicted"] + [f"p_{c}" for c in forest.classes]
        rows = ([int(tid), io.fmt(T), lab, p] + [io.fmt(x) for x in pr]
                for tid, T, lab, p, pr in zip(fm.trace_ids, fm.column("T"), fm.labels, pred, proba))
        Path(args.out).write_text(io.csv_rows(header, rows))
    known = np.isin(fm.labels, forest.classes)
    sample_acc = float(np.mean(np.array(pred, dtype=object)[known] == fm.labels[known])) if known.any() else float("nan")
    verdicts = eb.trace_verdicts(forest, fm)
    truth = {int(t): fm.labels[fm.trace_ids == t][0] for t in np.unique(fm.trace_ids)}
    trace_acc = float(np.mean([verdicts[t] == truth[t] for t in verdicts]))
    print(f"sample accuracy: {sample_acc:.6f}")
    print(f"trace accuracy: {trace_acc:.6f}")
    for t in sorted(verdicts):
        print(f"  trace {t}: label={truth[t]} verdict={verdicts[t]}")
    return 0


def cmd_importance(args) -> int:
    cfg = _config(args)
    traces = io.read_traces(args.dataset)
    fsm = eb.build_eb_fsm(traces, cfg.forest, cfg.n_repeats)
    text = fsm.to_text(digits=args.digits)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    if args.threshold is not None:
        _print_analysis(fsm.binarize(args.threshold))
    return 0


def _print_analysis(fsm: FaultSignatureMatrix) -> None:
    for fault, det, iso in fsm.analysis():
        det_s = "detectable" if det else "not detectable"
        iso_s = "isolable" if iso else "not isolable"
        print(f"{fault}\t{det_s}, {iso_s}")


def cmd_fsm(args) -> int:
    if args.which == "mb":
        sys.stdout.write(case_study_fsm().to_text())
        return 0
    if args.file is None:
        raise ConfigError("fsm analyze needs a table file")
    fsm = FaultSignatureMatrix.from_text(Path(args.file).read_text())
    if not fsm.is_binary:
        fsm = fsm.binarize(args.threshold)
    _print_analysis(fsm)
    return 0


def _read_dag(path: str) -> Dag:
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        text = resources.files("fdi").joinpath("data", f"{name}.dag").read_text()
        return Dag.from_text(text)
    return Dag.from_text(Path(path).read_text())


def cmd_dsep(args) -> int:
    dag = _read_dag(args.dag)
    tree: dict[str, object] = {}
    lines = []
    if args.x or args.y:
        if not (args.x and args.y):
            raise ConfigError("dsep needs both --x and --y")
        given = args.given or []
        sep = d_separated(dag, set(args.x), set(args.y), set(given))
        stmt = Independence(",".join(args.x), ",".join(args.y), tuple(given))
        verdict = "d-separated" if sep else "d-connected"
        lines.append(f"{stmt}: {verdict}")
        tree.update(x=args.x, y=args.y, given=given, d_separated=sep)
    if args.factorize:
        factors = factorization(dag)
        lines.append("factorization: " + format_factorization(factors))
        tree["factorization"] = [[v, sorted(pa)] for v, pa in factors]
    if args.implied is not None:
        stmts = implied_independencies(dag, args.implied)
        lines.extend(f"implied: {s}" for s in stmts)
        tree["implied"] = [[s.x, s.y, list(s.given)] for s in stmts]
    if not lines:
        raise ConfigError("nothing to do: give --x/--y, --factorize or --implied")
    if args.json:
        print(json.dumps(tree, sort_keys=True))
    else:
        print("\n".join(lines))
    return 0


def cmd_assess(args) -> int:
    if args.pipeline:
        profile = case_study_profiles()[args.pipeline]
    else:
        decisions = [d.strip() for d in (args.decisions or "").split(",") if d.strip()]
        try:
            profile = CapabilityProfile(frozenset(decisions), args.causality)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    report = assess(profile)
    if args.json:
        print(json.dumps(report.to_tree(), sort_keys=True))
    else:
        sys.stdout.write(report.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--seed", type=int, help="seed for noise, datasets and forests")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a configuration value (repeatable)")

    p = _Parser(prog="fdi", description="Fault detection and isolation workbench for the RRC circuit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="simulate a trace or a labelled dataset")
    s.add_argument("--out", required=True)
    s.add_argument("--computed", action="store_true",
                   help="also write the noise-free healthy model curve to OUT.computed.csv")
    s.add_argument("--dataset", choices=["train", "validation"],
                   help="write a labelled dataset of every treatment instead of one trace")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("residuals", parents=[common], help="evaluate ARR residuals and diagnose")
    s.add_argument("trace")
    s.add_argument("--out")
    s.set_defaults(func=cmd_residuals)

    s = sub.add_parser("train", parents=[common], help="train a forest on a labelled dataset")
    s.add_argument("dataset")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("classify", parents=[common], help="classify a dataset with a saved forest")
    s.add_argument("dataset")
    s.add_argument("--model", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("importance", parents=[common], help="print the importance-valued FSM")
    s.add_argument("dataset")
    s.add_argument("--out")
    s.add_argument("--digits", type=int, default=2)
    s.add_argument("--threshold", type=float, help="also print the analysis binarized at this score")
    s.set_defaults(func=cmd_importance)

    s = sub.add_parser("fsm", parents=[common], help="print or analyze a fault signature matrix")
    s.add_argument("which", choices=["mb", "analyze"])
    s.add_argument("file", nargs="?")
    s.add_argument("--threshold", type=float, default=0.05)
    s.set_defaults(func=cmd_fsm)

    s = sub.add_parser("dsep", parents=[common], help="d-separation and factorization queries")
    s.add_argument("dag", help="DAG edge-list file, or builtin:rrc_indicators / builtin:two_variable")
    s.add_argument("--x", nargs="+")
    s.add_argument("--y", nargs="+")
    s.add_argument("--given", nargs="*")
    s.add_argument("--factorize", action="store_true")
    s.add_argument("--implied", type=int, metavar="MAX_Z")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_dsep)

    s = sub.add_parser("assess", parents=[common], help="maturity report")
    s.add_argument("--pipeline", choices=["mb", "eb"])
    s.add_argument("--decisions", help="comma-separated decisions, e.g. Detect,Isolate")
    s.add_argument("--causality", default="None", choices=["Associational", "ModelBased", "None"])
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_assess)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FdiError as exc:
        msg = exc.args[0] if exc.args else type(exc).__name__
        print(f"fdi: {type(exc).__name__}: {msg}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"fdi: I/O error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"fdi: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
