"""``omcl`` command-line interface.

Verbs: generate, teach, recognize, osr, gridsearch-weights, gridsearch-delta,
report. Every default comes from the config file (``--config``), see
``configs/default.yaml``; ``OMCL_SEED`` / ``OMCL_OUTPUT_DIR`` override the
seed and output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .concepts import ConceptRegistry, RegistryError
from .config import ConfigError, HarnessConfig, load_config
from .data_model import (DemonstrationError, EnvironmentCatalog, read_catalog, read_demonstrations,
                         write_catalog, write_demonstrations)
from .harness import (format_summary, grid_search_delta, grid_search_weights, load_osr_reports,
                      osr_experiment, save_osr_reports, write_report)
from .prototype import build_prototype
from .recognition import recognize
from .synthetic import CATALOG, CLASSES, generate_dataset


class CliError(Exception):
    pass


def _catalog(args) -> EnvironmentCatalog:
    return read_catalog(args.catalog) if args.catalog else CATALOG


def _dataset(args, cfg: HarnessConfig, catalog: EnvironmentCatalog):
    if args.demos:
        return read_demonstrations(args.demos, catalog)
    return generate_dataset(cfg.generator_config, n_per_class=cfg.experiment.n_per_class)


def _out_dir(args, cfg: HarnessConfig) -> Path:
    out = Path(args.output_dir or cfg.experiment.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(obj, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _selected_weights(path) -> tuple[float, float]:
    """(k_lambda0, k_rho0) selected by a gridsearch-weights result file."""
    try:
        with open(path) as fh:
            d = json.load(fh)
        k_lambda, k_rho = (float(v) for v in d["selected"])
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CliError(f"{path}: not a weight grid-search result ({e})") from None
    return k_lambda, k_rho


# ------------------------------------------------------------------ verbs

def cmd_generate(args, cfg: HarnessConfig) -> int:
    classes = args.classes or CLASSES
    unknown = sorted(set(classes) - set(CLASSES))
    if unknown:
        raise CliError(f"unknown classes: {unknown}")
    n = args.n_per_class or cfg.experiment.n_per_class
    demos = generate_dataset(cfg.generator_config, n_per_class=n, classes=classes)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_demonstrations(out, demos)
    catalog_path = Path(args.catalog_out) if args.catalog_out else out.with_name("catalog.json")
    write_catalog(catalog_path, CATALOG)
    print(f"wrote {len(demos)} demonstrations to {out} (catalog: {catalog_path})")
    return 0


def _load_or_new_registry(path: Path, args, cfg: HarnessConfig) -> ConceptRegistry:
    if path.exists():
        try:
            return ConceptRegistry.load(path)
        except (ValueError, KeyError, TypeError) as e:
            raise CliError(f"{path}: unreadable registry ({e})") from None
    return ConceptRegistry(catalog=_catalog(args), library=cfg.library.new_library(), config=cfg.concepts)


def _ask_designation(prompt_in, prompt_out) -> str:
    prompt_out.write("Novel action. Designation: ")
    prompt_out.flush()
    line = prompt_in.readline()
    if not prompt_in.isatty():
        prompt_out.write("\n")  # echo the piped answer's line break
    name = line.strip()
    if not name:
        raise CliError("no designation given for a novel demonstration")
    return name


def cmd_teach(args, cfg: HarnessConfig, stdin=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    path = Path(args.registry)
    reg = _load_or_new_registry(path, args, cfg)
    demos = read_demonstrations(args.demos, reg.catalog)
    for i, d in enumerate(demos):
        p = build_prototype(d, reg.library, cfg.segmentation, learn=True, n_locations=reg.catalog.n_locations)
        name = args.designation
        if name is None:
            dec = recognize(reg, p)
            print(f"[{i}] {_describe(dec)}")
            name = dec.designation if dec.recognized else _ask_designation(stdin, sys.stdout)
        before = (reg.get(name).k_rho, reg.get(name).k_lambda) if name in reg else None
        c = reg.learn(p, name)
        if before is None:
            print(f"[{i}] created concept {name!r}")
        else:
            print(f"[{i}] updated concept {name!r} ({len(c.prototypes)} prototypes): "
                  f"k_rho {before[0]:.6g} -> {c.k_rho:.6g}, k_lambda {before[1]:.6g} -> {c.k_lambda:.6g}")
    reg.save(path)
    print(f"registry {path}: {len(reg)} concepts, {len(reg.library.primitives)} primitives")
    return 0


def _describe(dec) -> str:
    if dec.candidate is None:
        return "novel (registry is empty)"
    costs = f"C_R={dec.c_r:.4f}" + ("" if dec.c_w is None else f", C_W={dec.c_w:.4f}")
    if dec.recognized:
        return f"recognized as {dec.designation!r} ({costs})"
    return f"novel; closest concept {dec.candidate!r} ({costs})"


def cmd_recognize(args, cfg: HarnessConfig) -> int:
    reg = ConceptRegistry.load(args.registry)
    demos = read_demonstrations(args.demos, reg.catalog)
    delta = args.delta_c
    for i, d in enumerate(demos):
        p = build_prototype(d, reg.library, cfg.segmentation, learn=False, n_locations=reg.catalog.n_locations)
        dec = recognize(reg, p, delta_c=delta)
        if args.json:
            print(json.dumps({"index": i, "label": d.label, **dec.to_dict()}, sort_keys=True))
        else:
            truth = f" (label {d.label!r})" if d.label is not None else ""
            print(f"[{i}]{truth} {_describe(dec)}")
    return 0


def cmd_osr(args, cfg: HarnessConfig) -> int:
    catalog = _catalog(args)
    data = _dataset(args, cfg, catalog)
    weights = None
    if args.weights_from:
        k_lambda, k_rho = _selected_weights(args.weights_from)
        weights = (k_rho, k_lambda)
    recognizers = args.recognizers or list(cfg.experiment.recognizers)
    reports = osr_experiment(data, catalog, recognizers, repetitions=args.repetitions or cfg.experiment.repetitions,
                             seed=cfg.experiment.seed, params=cfg.omcl, weights=weights)
    out = _out_dir(args, cfg)
    save_osr_reports(reports, out / "osr_reports.json")
    for rep in reports.values():
        write_report(rep, out)
    print(format_summary(reports))
    print(f"reports written to {out}")
    return 0


def cmd_gridsearch_weights(args, cfg: HarnessConfig) -> int:
    catalog = _catalog(args)
    data = _dataset(args, cfg, catalog)
    res = grid_search_weights(data, catalog, cfg.experiment.weight_grid,
                              repeats=args.repetitions or cfg.experiment.repetitions,
                              seed=cfg.experiment.seed, params=cfg.omcl)
    for t, s in zip(res.tuples, res.mean_scores):
        print(f"k_lambda0={t[0]:<8g} k_rho0={t[1]:<8g} accuracy {100 * s:5.1f} %")
    print(f"selected k_lambda0={res.selected[0]:g} k_rho0={res.selected[1]:g}")
    path = _out_dir(args, cfg) / "gridsearch_weights.json"
    _write_json(res.to_dict(), path)
    print(f"written to {path}")
    return 0


def cmd_gridsearch_delta(args, cfg: HarnessConfig) -> int:
    catalog = _catalog(args)
    data = _dataset(args, cfg, catalog)
    if args.weights_from:
        weights = _selected_weights(args.weights_from)
    else:
        weights = (cfg.concepts.k_lambda0, cfg.concepts.k_rho0)
    res = grid_search_delta(data, catalog, weights, cfg.experiment.delta_grid,
                            repeats=args.repetitions or cfg.experiment.repetitions,
                            seed=cfg.experiment.seed, params=cfg.omcl)
    for t, s in zip(res.tuples, res.mean_scores):
        print(f"delta_c={t[0]:<6g} confirmed and correct {100 * s:5.1f} %")
    print(f"selected delta_c={res.selected[0]:g}")
    path = _out_dir(args, cfg) / "gridsearch_delta.json"
    _write_json(res.to_dict(), path)
    print(f"written to {path}")
    return 0


def cmd_report(args, cfg: HarnessConfig) -> int:
    try:
        reports = load_osr_reports(args.reports)
    except (ValueError, KeyError, TypeError) as e:
        raise CliError(f"{args.reports}: not an OSR report file ({e})") from None
    out = _out_dir(args, cfg)
    for rep in reports.values():
        for p in write_report(rep, out):
            print(f"wrote {p}")
    print(format_summary(reports))
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="omcl", description="Motion concepts: one-shot action learning and recognition.")
    ap.add_argument("--config", help="YAML config file (defaults: configs/default.yaml)")
    sub = ap.add_subparsers(dest="verb", required=True)

    def data_opts(p):
        p.add_argument("--demos", help="JSONL demonstrations (default: generate from the config)")
        p.add_argument("--catalog", help="catalog JSON for --demos (default: built-in household catalog)")
        p.add_argument("--repetitions", type=int, help="repetitions / repeats per grid point")
        p.add_argument("--output-dir", help="output directory (default: experiment.output_dir)")

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("-o", "--output", required=True, help="output JSONL file")
    p.add_argument("--n-per-class", type=int)
    p.add_argument("--classes", nargs="+", metavar="CLASS")
    p.add_argument("--catalog-out", help="catalog JSON path (default: catalog.json next to the output)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("teach", help="teach demonstrations to a registry (created if missing)")
    p.add_argument("registry")
    p.add_argument("demos")
    p.add_argument("--designation", help="concept name; without it, recognition decides and asks on novelty")
    p.add_argument("--catalog", help="catalog JSON used when creating a new registry")
    p.set_defaults(func=cmd_teach)

    p = sub.add_parser("recognize", help="recognize demonstrations against a registry")
    p.add_argument("registry")
    p.add_argument("demos")
    p.add_argument("--delta-c", type=float, help="override the registry's novelty margin")
    p.add_argument("--json", action="store_true", help="one JSON decision per line")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("osr", help="one-shot recognition experiment")
    data_opts(p)
    p.add_argument("--recognizers", nargs="+", choices=["omcl", "omcl-n", "gmm-hmm"])
    p.add_argument("--weights-from", help="use the tuple selected in a gridsearch_weights.json")
    p.set_defaults(func=cmd_osr)

    p = sub.add_parser("gridsearch-weights", help="grid search over (k_lambda0, k_rho0)")
    data_opts(p)
    p.set_defaults(func=cmd_gridsearch_weights)

    p = sub.add_parser("gridsearch-delta", help="grid search over the novelty margin")
    data_opts(p)
    p.add_argument("--weights-from", help="use the tuple selected in a gridsearch_weights.json")
    p.set_defaults(func=cmd_gridsearch_delta)

    p = sub.add_parser("report", help="write metrics and confusion tables from osr_reports.json")
    p.add_argument("reports")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (CliError, ConfigError, DemonstrationError, RegistryError) as e:
        print(f"omcl: error: {e}", file=sys.stderr)
    except OSError as e:
        print(f"omcl: error: {e.filename or ''}: {e.strerror}", file=sys.stderr)
    except (ValueError, KeyError) as e:
        print(f"omcl: error: {e}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
