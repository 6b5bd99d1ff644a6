"""Command-line front end: ``pefmc <command> [options]``.

Exit codes: 0 success, 1 a check ran and failed (reduce disagreement,
certify mismatch), 2 bad input, 3 a size cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .classify import (
    FIXED_MOVE_POLICIES,
    Budget,
    BreakKind,
    SplitSentence,
    certify_break,
    classify,
    classify_promise,
    small_sentences,
)
from .engine import evaluate
from .errors import BudgetError, PefError
from .formula import dual_formula, parse_sentence, render
from .infinite import ExistentialPolicy, UniversalPolicy, eval_infinite, eval_restricted
from .reductions import brute_force_q13, compile_q13, parse_q13, pmc_eval
from .templates import FiniteStructure, SymbolicTemplate, dual, dump_template, load_template

COMMANDS = ("eval", "classify", "reduce", "dual", "promise", "certify")


@dataclass
class RunConfig:
    command: str
    template: str | None = None
    template_b: str | None = None
    sentence: str | None = None
    q13: str | None = None
    and_witness: str | None = None
    or_witness: str | None = None
    output: str | None = None
    policy_universal: str = "none"
    policy_existential: str = "none"
    max_vars: int = 3
    max_atoms: int = 3
    nested: bool = False
    sample: int | None = None
    format: str = "text"
    seed: int = 0

    def __post_init__(self):
        needed = {
            "eval": ("template", "sentence"),
            "classify": ("template",),
            "reduce": ("template", "q13", "and_witness", "or_witness"),
            "dual": ("template", "sentence"),
            "promise": ("template", "template_b"),
            "certify": ("template",),
        }[self.command]
        missing = [n for n in needed if getattr(self, n) is None]
        if missing:
            flags = ", ".join("--" + n.replace("_", "-") for n in missing)
            raise UsageError(f"{self.command} requires {flags}")


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pefmc", description="Model checking for positive equality-free logic.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--template", help="template file (.tpl)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--seed", type=int, default=0, help="seed for randomised choices (default 0)")

    def budget(p: argparse.ArgumentParser) -> None:
        p.add_argument("--max-vars", type=int, default=3)
        p.add_argument("--max-atoms", type=int, default=3)

    def policies(p: argparse.ArgumentParser) -> None:
        p.add_argument("--policy-universal", choices=[x.value for x in UniversalPolicy], default="none")
        p.add_argument("--policy-existential", choices=[x.value for x in ExistentialPolicy], default="none")

    p = sub.add_parser("eval", help="evaluate a sentence on a template")
    common(p)
    p.add_argument("--sentence", help="sentence file (.pef)")
    policies(p)

    p = sub.add_parser("classify", help="label a template by witness search and certificates")
    common(p)
    budget(p)
    p.add_argument("--nested", action="store_true", help="allow one inner quantifier in witness parts")

    p = sub.add_parser("reduce", help="compile a Q13 instance and compare with brute force")
    common(p)
    p.add_argument("--q13", help="instance file (.q13)")
    p.add_argument("--and-witness", help="conjunction-breaking sentence (.pef)")
    p.add_argument("--or-witness", help="disjunction-breaking sentence (.pef)")
    p.add_argument("--output", help="where to write the compiled sentence (default: next to the .q13 file)")

    p = sub.add_parser("dual", help="write the dual template and sentence")
    common(p)
    p.add_argument("--sentence", help="sentence file (.pef)")
    p.add_argument("--output", help="output directory (default: current directory)")

    p = sub.add_parser("promise", help="evaluate on a promise pair, or classify the pair")
    common(p)
    p.add_argument("--template-b", help="second template of the promise pair")
    p.add_argument("--sentence", help="sentence file; omitted means classify the pair")
    budget(p)

    p = sub.add_parser("certify", help="compare restricted and exact play on all small sentences")
    common(p)
    budget(p)
    policies(p)
    p.add_argument("--sample", type=int, help="check a seeded random sample of this many sentences")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    keys = RunConfig.__dataclass_fields__.keys()
    return RunConfig(**{k: getattr(ns, k) for k in keys if hasattr(ns, k)})


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _sentence(path: str):
    return parse_sentence(_read(path))


def _yes(value: bool) -> str:
    return "TRUE" if value else "FALSE"


def _emit(cfg: RunConfig, payload: dict, lines: list[str]) -> None:
    if cfg.format == "json":
        print(json.dumps({"command": cfg.command, "seed": cfg.seed, **payload}, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _evidence_line(e: dict) -> str:
    if e["type"] == "Shop":
        images = ", ".join(f"{x}->{{{','.join(map(str, img))}}}" for x, img in e["images"].items())
        return f"  Shop: {images}"
    if e["type"] == "StrategyAgreement":
        return f"  StrategyAgreement: {e['universal']}/{e['existential']} on {e['sentences']} sentences"
    return f"  {e['type']}: {e['sentence']}"


def cmd_eval(cfg: RunConfig) -> int:
    t = load_template(cfg.template)
    s = _sentence(cfg.sentence)
    restricted = cfg.policy_universal != "none" or cfg.policy_existential != "none"
    if restricted:
        if not isinstance(t, SymbolicTemplate):
            raise UsageError("strategy policies apply to symbolic templates only")
        verdict = eval_restricted(t, s, cfg.policy_universal, cfg.policy_existential)
    else:
        verdict = evaluate(t, s)
    payload = {
        "template": t.name,
        "sentence": render(s),
        "verdict": verdict,
        "policy": {"universal": cfg.policy_universal, "existential": cfg.policy_existential},
    }
    _emit(cfg, payload, [_yes(verdict)])
    return 0


def cmd_classify(cfg: RunConfig) -> int:
    t = load_template(cfg.template)
    label = classify(t, Budget(cfg.max_vars, cfg.max_atoms, cfg.nested))
    data = label.to_json()
    lines = [label.label.value + (" (conditional)" if label.conditional else "")]
    lines += [_evidence_line(e) for e in data["evidence"]]
    if label.detail:
        lines.append(f"  {label.detail}")
    _emit(cfg, {"template": t.name, **data}, lines)
    return 0


def cmd_reduce(cfg: RunConfig) -> int:
    t = load_template(cfg.template)
    inst = parse_q13(_read(cfg.q13))
    witnesses = {}
    for kind, path in ((BreakKind.BREAKS_AND, cfg.and_witness), (BreakKind.BREAKS_OR, cfg.or_witness)):
        split = SplitSentence.from_sentence(_sentence(path))
        w = certify_break(t, split, kind)
        if w is None:
            raise UsageError(f"{path} does not break {kind.connective.value} on {t.name}")
        witnesses[kind] = w
    compiled = compile_q13(inst, witnesses[BreakKind.BREAKS_AND], witnesses[BreakKind.BREAKS_OR])
    out = Path(cfg.output) if cfg.output else Path(cfg.q13).with_suffix(".pef")
    out.write_text(render(compiled) + "\n", encoding="utf-8")
    on_template, brute = evaluate(t, compiled), brute_force_q13(inst)
    agree = on_template == brute
    payload = {"template": t.name, "output": str(out), "compiled": on_template, "bruteForce": brute, "agree": agree}
    _emit(cfg, payload, [f"compiled: {_yes(on_template)}", f"brute-force: {_yes(brute)}", f"wrote {out}"])
    return 0 if agree else 1


def cmd_dual(cfg: RunConfig) -> int:
    t = load_template(cfg.template)
    s = _sentence(cfg.sentence)
    dt, ds = dual(t), dual_formula(s)
    outdir = Path(cfg.output or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    t_path = outdir / (Path(cfg.template).stem + ".dual.tpl")
    s_path = outdir / (Path(cfg.sentence).stem + ".dual.pef")
    dump_template(dt, t_path)
    s_path.write_text(render(ds) + "\n", encoding="utf-8")
    before, after = evaluate(t, s), evaluate(dt, ds)
    payload = {
        "template": t.name,
        "verdict": before,
        "dualVerdict": after,
        "dualTemplate": str(t_path),
        "dualSentence": str(s_path),
    }
    _emit(cfg, payload, [f"original: {_yes(before)}", f"dual: {_yes(after)}", f"wrote {t_path}", f"wrote {s_path}"])
    return 0


def cmd_promise(cfg: RunConfig) -> int:
    a, b = load_template(cfg.template), load_template(cfg.template_b)
    if not (isinstance(a, FiniteStructure) and isinstance(b, FiniteStructure)):
        raise UsageError("promise templates must be finite structures")
    if cfg.sentence is None:
        label = classify_promise(a, b, Budget(cfg.max_vars, cfg.max_atoms))
        data = label.to_json()
        lines = [label.label.value + (" (conditional)" if label.conditional else "")]
        lines += [_evidence_line(e) for e in data["evidence"]]
        if label.detail:
            lines.append(f"  {label.detail}")
        _emit(cfg, {"templates": [a.name, b.name], **data}, lines)
        return 0
    s = _sentence(cfg.sentence)
    v = pmc_eval(a, b, s)
    payload = {"templates": [a.name, b.name], "sentence": render(s), **v.to_json()}
    _emit(cfg, payload, [v.verdict.value, f"  on {a.name}: {_yes(v.true_on_a)}", f"  on {b.name}: {_yes(v.true_on_b)}"])
    return 0


def cmd_certify(cfg: RunConfig) -> int:
    t = load_template(cfg.template)
    if not isinstance(t, SymbolicTemplate):
        raise UsageError("certify needs a symbolic template")
    up, ep = UniversalPolicy(cfg.policy_universal), ExistentialPolicy(cfg.policy_existential)
    if up is UniversalPolicy.UNRESTRICTED and ep is ExistentialPolicy.UNRESTRICTED:
        ups, eps = FIXED_MOVE_POLICIES[t.base]
        up, ep = ups[0], eps[0]
    suite = list(small_sentences(t.signature, cfg.max_vars, cfg.max_atoms))
    if cfg.sample is not None and cfg.sample < len(suite):
        suite = random.Random(cfg.seed).sample(suite, cfg.sample)
    mismatches = [render(s) for s in suite if eval_restricted(t, s, up, ep) != eval_infinite(t, s)]
    payload = {
        "template": t.name,
        "universal": up.value,
        "existential": ep.value,
        "sentences": len(suite),
        "maxVars": cfg.max_vars,
        "maxAtoms": cfg.max_atoms,
        "mismatches": mismatches,
        "agrees": not mismatches,
    }
    lines = [f"{'AGREE' if not mismatches else 'DISAGREE'} {up.value}/{ep.value} on {len(suite)} sentences"]
    lines += [f"  mismatch: {m}" for m in mismatches]
    _emit(cfg, payload, lines)
    return 0 if not mismatches else 1


HANDLERS = {
    "eval": cmd_eval,
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "dual": cmd_dual,
    "promise": cmd_promise,
    "certify": cmd_certify,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = _config(ns)
        if cfg.max_vars < 1 or cfg.max_atoms < 2:
            raise UsageError("budget needs --max-vars >= 1 and --max-atoms >= 2")
        return HANDLERS[cfg.command](cfg)
    except BudgetError as exc:
        print(f"pefmc: cap exceeded: {exc}", file=sys.stderr)
        return 3
    except (PefError, UsageError, ValueError, OSError) as exc:
        print(f"pefmc: error: {_one_line(exc)}", file=sys.stderr)
        return 2


def _one_line(exc: Exception) -> str:
    text = str(exc) or type(exc).__name__
    return " ".join(text.split())


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
