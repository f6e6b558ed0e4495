"""Command-line front end: ``csskit <command> --model ... [flags]``.

Every command writes a JSON report (stdout unless ``--out``) and exits with
0 when all checks pass, 1 on a verification failure, or a distinct code for
bad input (see EXIT_CODES).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import checks, gsd
from .chain import ComplexError, dualize, foliate, homology_dims
from .models import ConstraintViolation, UnknownModel, build_model, parse_model
from .statesim import CapExceeded, check_cap
from .statmech import SpinCapExceeded

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_UNKNOWN_MODEL = 3
EXIT_CAP = 4
EXIT_CONSTRAINT = 5
EXIT_BUDGET = 6

EXIT_CODES = {
    "ok": EXIT_OK,
    "verification failed": EXIT_VERIFY,
    "usage": EXIT_USAGE,
    "unknown model": EXIT_UNKNOWN_MODEL,
    "cap exceeded": EXIT_CAP,
    "constraint violation": EXIT_CONSTRAINT,
    "budget exceeded": EXIT_BUDGET,
}

MIN_CAP_QUBITS = 4
MIN_CAP_SPINS = 4

COMMANDS = ["build", "homology", "gsd", "kw-verify", "fusion", "gauge-protocol", "strange", "duality",
            "foliated-duality", "anomaly", "bf", "suite"]
CHAMON_COMMANDS = ("build", "kw-verify", "fusion", "gauge-protocol")


@dataclass
class RunConfig:
    model: str = "toric2d"
    L: list[int] = field(default_factory=list)
    Lw: int = 1
    Ltau: int = 1
    K: list[float] = field(default_factory=lambda: [0.5])
    J: float = 0.4
    seed: int = 0
    runs: int = 100
    trials: int = 50
    cap_qubits: int = 24
    cap_spins: int = 30
    boundary: str = "periodic"
    out: str | None = None

    def validate(self) -> None:
        if self.cap_qubits < MIN_CAP_QUBITS or self.cap_spins < MIN_CAP_SPINS:
            raise UsageError(f"caps must be at least {MIN_CAP_QUBITS} qubits and {MIN_CAP_SPINS} spins")
        if self.boundary not in ("periodic", "open"):
            raise UsageError(f"boundary must be periodic or open, got {self.boundary!r}")
        if self.Lw < 1 or self.Ltau < 1:
            raise UsageError("Lw and Ltau must be positive")


class UsageError(ValueError):
    pass


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csskit", description="CSS chain complexes, KW duality and anomaly checks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--model")
    p.add_argument("--L", type=_ints, help="periods, e.g. 2 or 2,3")
    p.add_argument("--Lw", type=int)
    p.add_argument("--Ltau", type=int)
    p.add_argument("--K", type=_floats, help="coupling(s), comma separated")
    p.add_argument("--J", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--cap-qubits", dest="cap_qubits", type=int)
    p.add_argument("--cap-spins", dest="cap_spins", type=int)
    p.add_argument("--boundary", choices=["periodic", "open"])
    p.add_argument("--out")
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - set(asdict(cfg))
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for k in asdict(cfg):
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    cfg.validate()
    return cfg


def _periods(cfg: RunConfig) -> tuple[int, ...]:
    return tuple(cfg.L) if cfg.L else (2,)


def _qubit_count(cfg: RunConfig) -> int:
    spec = parse_model(cfg.model)
    if spec.name == "chamon":
        m = build_model(cfg.model, _periods(cfg))
        return m.num_cubes + m.num_vertices
    css = build_model(cfg.model, _periods(cfg))
    return css.num_qubits + css.size(0)


def _spin_cap(cfg: RunConfig, n: int) -> None:
    if n > cfg.cap_spins:
        raise SpinCapExceeded(f"{n} spins exceeds --cap-spins {cfg.cap_spins}")


def run_command(command: str, cfg: RunConfig) -> dict:
    per = _periods(cfg)
    if command != "suite" and parse_model(cfg.model).name == "chamon" and command not in CHAMON_COMMANDS:
        raise UsageError(f"{command} needs a CSS model; chamon supports {', '.join(CHAMON_COMMANDS)}")
    reports: list[dict] = []
    extra: dict = {}
    if command == "build":
        obj = build_model(cfg.model, per)
        if hasattr(obj, "to_json"):
            extra["complex"] = json.loads(obj.to_json())
        else:
            extra["chamon"] = {"periods": list(obj.periods), "cubes": obj.num_cubes, "vertices": obj.num_vertices}
    elif command == "homology":
        css = build_model(cfg.model, per)
        extra["homology_dims"] = homology_dims(css)
        extra["cohomology_dims"] = homology_dims(dualize(css))
        reports.append(checks.pairing_check(cfg.model, per).to_dict())
    elif command == "gsd":
        name = parse_model(cfg.model).name
        if name in ("cc", "qc"):
            reports.append(checks.gsd_check(cfg.model, per).to_dict())
        else:
            reports.append(checks.cross_check(cfg.model, per).to_dict())
    elif command in ("kw-verify", "fusion", "gauge-protocol"):
        check_cap(_qubit_count(cfg), cfg.cap_qubits)
        if command == "kw-verify":
            reports.append(checks.kw_relations_check(cfg.model, per).to_dict())
        elif command == "fusion":
            reports.append(checks.fusion_report(cfg.model, per).to_dict())
        else:
            reports.append(checks.protocol_report(cfg.model, per, runs=cfg.runs, seed=cfg.seed).to_dict())
    elif command in ("strange", "duality"):
        css = build_model(cfg.model, per)
        _spin_cap(cfg, max(css.num_qubits, css.size(0) if command == "strange" else css.size(2)))
        if command == "strange":
            check_cap(css.num_qubits + css.size(0), cfg.cap_qubits)
            reports.append(checks.strange_check(cfg.model, per, cfg.K).to_dict())
        else:
            reports.append(checks.duality_check(cfg.model, per, cfg.K).to_dict())
    elif command == "foliated-duality":
        fol = foliate(build_model(cfg.model, per), cfg.Lw, "periodic")
        _spin_cap(cfg, max(fol.size(2), fol.size(0)))
        for K in cfg.K:
            reports.append(checks.foliated_duality_check(cfg.model, per, cfg.Lw, cfg.J, K).to_dict())
    elif command == "anomaly":
        if cfg.boundary == "open":
            reports.append(checks.inflow_report(cfg.model, per, cfg.Lw, cfg.Ltau, cfg.trials, cfg.seed).to_dict())
        else:
            fol = foliate(build_model(cfg.model, per), cfg.Lw, "periodic")
            sv = 2 if fol.num_qubits <= cfg.cap_qubits else 0
            reports.append(checks.closed_trace_check(cfg.model, per, cfg.Lw, cfg.Ltau, cfg.trials, cfg.seed,
                                                     statevector_pairs=sv).to_dict())
    elif command == "bf":
        reports.append(checks.bf_report(cfg.model, per, cfg.Ltau, cfg.seed).to_dict())
    elif command == "suite":
        crit = [checks.run_criterion(c) for c in checks.CRITERIA]
        extra["criteria"] = crit
        extra["summary"] = [checks.criterion_line(c) for c in crit]
        reports = [p for c in crit for p in c["parts"]]
    else:
        raise UsageError(f"unknown command {command!r}")
    ok = all(r["pass"] for r in reports)
    if command == "suite":
        ok = all(c["pass"] for c in extra["criteria"])
    config = asdict(cfg)
    config.pop("out")
    return {"command": command, "config": config, "pass": ok, "reports": reports, **extra}


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(code: int, kind: str, message: str, out: str | None) -> int:
    sys.stderr.write(f"csskit: {kind}: {message}\n")
    _emit({"error": kind, "message": message, "exit_code": code}, out)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = args.out
    try:
        cfg = make_config(args)
        out = cfg.out
        doc = run_command(args.command, cfg)
    except UsageError as e:
        return _error(EXIT_USAGE, "usage", str(e), out)
    except UnknownModel as e:
        return _error(EXIT_UNKNOWN_MODEL, "unknown model", str(e), out)
    except (CapExceeded, SpinCapExceeded) as e:
        return _error(EXIT_CAP, "cap exceeded", str(e), out)
    except ConstraintViolation as e:
        return _error(EXIT_CONSTRAINT, "constraint violation", str(e), out)
    except gsd.BudgetExceeded as e:
        return _error(EXIT_BUDGET, "budget exceeded", str(e), out)
    except (ComplexError, ValueError) as e:
        return _error(EXIT_USAGE, "usage", str(e), out)
    _emit(doc, out)
    return EXIT_OK if doc["pass"] else EXIT_VERIFY


if __name__ == "__main__":
    raise SystemExit(main())
