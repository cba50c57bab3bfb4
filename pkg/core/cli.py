"""
Linha de comando do ObsLearn

Códigos de saída: 0 sucesso, 1 erro de validação, 2 experimento reprovado
frente ao epsilon, 3 erro interno. Diagnósticos vão para stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from core.circuit import Circuit, StateVector, random_circuit
from core.clockham import verify_perfect_transfer
from core.concepts import NoiseModel, feature_matrix, gen_dataset
from core.config_store import get_config
from core.constants import ExitCode, NoiseKind, Representation, StepRule
from core.errors import ConvergenceError, ObsLearnError, ValidationError
from core.harness import ExperimentConfig, build_concept, run_experiment, shallow_scaling, sweep, verify_suite
from core.kitaev import build_kitaev, history_state, verify_ground
from core.learners import (
    LassoConfig, ShallowLearnConfig, flipped_solve, generalization_bound, lasso_train, shallow_learn,
)
from core.loader import (
    load_config, load_dataset, load_features, load_labels, load_probes, load_text, to_json, write_json, write_text,
)
from core.spectral import evolve, load_operator

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Erros de parse viram ValidationError (código 1)."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _unwrap(result: Dict[str, Any], key: str) -> Any:
    if not result["success"]:
        raise ValidationError(result["error"])
    return result[key]


def _write(path: Optional[str], data: Any) -> None:
    if path:
        res = write_json(path, data)
        if not res["success"]:
            raise ValidationError(res["error"])


def _emit(args: argparse.Namespace, data: Dict[str, Any], lines: List[str]) -> None:
    if args.json:
        sys.stdout.write(to_json(data))
    else:
        for line in lines:
            print(line)


def _rng(args: argparse.Namespace) -> np.random.Generator:
    return np.random.default_rng(args.seed)


def _circuit(args: argparse.Namespace, n: int, k: int) -> Circuit:
    if getattr(args, "circuit", None):
        return Circuit.from_text(_unwrap(load_text(args.circuit), "text"), n)
    return random_circuit(_rng(args), n, k)


# ============================================================
# SUBCOMANDOS
# ============================================================
def cmd_gen_dataset(args: argparse.Namespace) -> int:
    cfg = _unwrap(load_config(args.config), "config") if args.config else {}
    concept = cfg.get("concept") or {
        "variant": args.variant, "n": args.n, "gates": args.gates, "k": args.k, "seed": args.seed,
    }
    spec, dist = build_concept(concept, args.seed)
    noise = NoiseModel.from_dict(cfg.get("noise") or {"kind": args.noise, "eps2": args.eps2, "shots": args.shots})
    data = gen_dataset(spec, dist, args.N, noise, args.seed, args.stream, args.threads)
    res = write_text(args.out, data.to_jsonl())
    if not res["success"]:
        raise ValidationError(res["error"])
    if args.features_out:
        phi = feature_matrix(spec, data.xs, noise, args.seed, args.stream, args.threads)
        lines = [json.dumps({"basis": [p.label for p in spec.basis]})]
        lines += [json.dumps({"phi": [float(v) for v in row]}) for row in phi]
        res = write_text(args.features_out, "\n".join(lines) + "\n")
        if not res["success"]:
            raise ValidationError(res["error"])
    _emit(args, data.meta, [f"{len(data)} amostras gravadas em {args.out}",
                            f"desvio máximo |y - f| = {data.meta['audit_max_deviation']:.3e}"])
    return ExitCode.OK.value


def cmd_train_lasso(args: argparse.Namespace) -> int:
    feats = load_features(args.features)
    phi, basis = _unwrap(feats, "features"), feats["basis"] or ()
    labels = _unwrap(load_labels(args.labels), "labels")
    cfg = LassoConfig(B=args.B, eps3=args.eps3, max_iters=args.max_iters, step_rule=StepRule(args.step_rule))
    model = lasso_train(phi, labels, cfg, basis)
    out = model.to_dict()
    out["generalization_bound"] = generalization_bound(model, cfg, phi.shape[1], phi.shape[0], args.delta)
    _write(args.out, out)
    _emit(args, out, [
        f"MSE de treino {model.diagnostics['train_mse']:.6e}",
        f"gap certificado {model.diagnostics['gap']:.3e} ({'convergiu' if model.converged else 'sem certificado'})",
        f"limite de generalização {out['generalization_bound']:.6g}",
    ])
    return ExitCode.OK.value


def cmd_shallow_learn(args: argparse.Namespace) -> int:
    probes = _unwrap(load_probes(args.probes), "probes")
    cfg = ShallowLearnConfig(k_max=args.k_max, epsilon=args.epsilon, delta=args.delta, threshold=args.threshold)
    obs = shallow_learn(probes, cfg)
    out = obs.to_dict()
    _write(args.out, out)
    _emit(args, out, [f"{a:+.6f} {lbl}" for lbl, a in zip(obs.labels(), obs.alpha)])
    return ExitCode.OK.value


def cmd_flipped_solve(args: argparse.Namespace) -> int:
    data = _unwrap(load_dataset(args.data), "dataset")
    if not data.flipped:
        raise ValidationError("Dataset sem vetores alpha: esperado um dataset do caso invertido")
    solution = flipped_solve(data.samples, args.ridge)
    out = solution.to_dict()
    _write(args.out, out)
    _emit(args, out, [f"posto {solution.rank}, resíduo {solution.residual:.3e}, "
                      f"condição {solution.condition:.3g}" + (" (posto deficiente)" if solution.rank_deficient else "")])
    return ExitCode.OK.value


def cmd_clock_verify(args: argparse.Namespace) -> int:
    c = _circuit(args, args.work, args.gates)
    rng = _rng(args)
    vec = rng.normal(size=2 ** c.n) + 1j * rng.normal(size=2 ** c.n)
    psi = StateVector.normalized(vec, c.n)
    report = verify_perfect_transfer(c, psi, args.tol, weighted=not args.feynman, t=args.time)
    out = report.to_dict()
    _emit(args, out, [f"fidelidade {report.fidelity:.12f} em t = {report.t_used:.6f}",
                      f"vazamento {report.leakage:.3e}, localidade {report.locality_measured}",
                      "ok" if report.passed else "falhou"])
    return ExitCode.OK.value if report.passed else ExitCode.EXPERIMENT_FAIL.value


def cmd_kitaev_verify(args: argparse.Namespace) -> int:
    c = _circuit(args, args.qubits, args.gates)
    x = args.input if args.input is not None else "0" * c.n
    representation = Representation(args.representation)
    h = build_kitaev(c, x, representation)
    report = verify_ground(h, history_state(c, x, representation), args.tol)
    out = report.to_dict()
    _emit(args, out, [f"energia {report.energy:.3e}, resíduo {report.residual:.3e}, gap {report.gap:.6f}",
                      f"decisão {report.decision_value:+.6f}, sobreposição com a saída {report.output_overlap:.6f}",
                      "ok" if report.passed else "falhou"])
    return ExitCode.OK.value if report.passed else ExitCode.EXPERIMENT_FAIL.value


def cmd_evolve(args: argparse.Namespace) -> int:
    text = _unwrap(load_text(args.operator), "text")
    h = load_operator(text, len(args.state), args.aux_dim)
    psi = StateVector.basis(args.state)
    if args.aux_dim > 1:
        psi = psi.with_register(args.aux_dim, args.clock)
    out_state = evolve(h, psi, args.time)
    amps = out_state.amplitudes
    out = {"dim": h.dim, "t": args.time, "norm": float(np.linalg.norm(amps)),
           "amplitudes": [[float(z.real), float(z.imag)] for z in amps]}
    _write(args.out, out)
    top = np.argsort(-np.abs(amps))[:8]
    _emit(args, out, [f"{i}: {amps[i].real:+.6f} {amps[i].imag:+.6f}i" for i in top])
    return ExitCode.OK.value


def cmd_experiment(args: argparse.Namespace) -> int:
    data = _unwrap(load_config(args.config), "config")
    data.setdefault("seed", args.seed)
    cfg = ExperimentConfig.from_dict(data)
    report = run_experiment(cfg, threads=args.threads)
    _write(args.out, report.to_dict())
    payload = report.payload
    _emit(args, report.to_dict(), [
        f"MSE de teste médio {payload['test_mse_mean']:.6e} (epsilon {cfg.epsilon})",
        f"taxa de aprovação {payload['pass_rate']:.2f}",
        "aprovado" if report.passed else "reprovado",
    ])
    return ExitCode.OK.value if report.passed else ExitCode.EXPERIMENT_FAIL.value


def cmd_sweep(args: argparse.Namespace) -> int:
    data = _unwrap(load_config(args.config), "config")
    grid = data.pop("grid", None) or {}
    if args.grid:
        try:
            grid = json.loads(args.grid)
        except json.JSONDecodeError as e:
            raise ValidationError(f"--grid não é JSON válido: {e.msg} (posição {e.pos})") from None
        if not isinstance(grid, dict):
            raise ValidationError("--grid deve ser um objeto JSON {campo: [valores]}")
    data.setdefault("seed", args.seed)
    base = ExperimentConfig.from_dict(data)
    reports, table = sweep(base, grid, threads=args.threads)
    out_dir = Path(args.out_dir)
    for i, report in enumerate(reports):
        _write(str(out_dir / f"report_{i:04d}.json"), report.to_dict())
    res = write_text(str(out_dir / "aggregate.csv"), table.to_csv(index=False, float_format="%.10g"))
    if not res["success"]:
        raise ValidationError(res["error"])
    summary = {"reports": len(reports), "aggregate": table.to_dict(orient="records")}
    _emit(args, summary, [f"{len(reports)} relatórios em {out_dir}", table.to_string(index=False)])
    return ExitCode.OK.value


def cmd_verify_suite(args: argparse.Namespace) -> int:
    summary = verify_suite(quick=args.quick, seed=args.seed)
    if args.scaling:
        scaling = shallow_scaling(seed=args.seed)
        summary["shallow_scaling"] = {"slope": scaling["slope"], "success_rate": scaling["success_rate"]}
    _write(args.out, summary)
    lines = [f"[{'ok' if c['passed'] else 'FALHOU'}] {c['module']}.{c['invariant']}: {c['detail']}"
             for c in summary["checks"]]
    lines.append(f"tempo total {summary['runtime']:.1f} s")
    _emit(args, summary, lines)
    return ExitCode.OK.value if summary["passed"] else ExitCode.EXPERIMENT_FAIL.value


# ============================================================
# PARSER
# ============================================================
def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="saída legível por máquina")
    common.add_argument("--seed", type=int, default=0, help="semente")
    common.add_argument("--threads", type=int, default=None, help="limite de paralelismo")
    common.add_argument("--verbose", "-v", action="store_true", help="logs de depuração")
    common.add_argument("--quiet", "-q", action="store_true", help="somente erros")

    parser = _Parser(prog="obslearn", description="Aprendizado de observáveis quânticos")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-dataset", parents=[common], help="gera dataset rotulado")
    p.add_argument("--config", help="JSON/TOML com concept, noise")
    p.add_argument("--variant", default="hard_instance")
    p.add_argument("--n", type=int, default=2, help="qubits de trabalho")
    p.add_argument("--gates", type=int, default=3)
    p.add_argument("--k", type=int, default=2, help="localidade da base")
    p.add_argument("--N", type=int, required=True, help="número de amostras")
    p.add_argument("--noise", choices=[k.value for k in NoiseKind], default="exact")
    p.add_argument("--eps2", type=float, default=0.0)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--stream", type=int, default=0, help="0 treino, 1 teste")
    p.add_argument("--out", required=True)
    p.add_argument("--features-out", help="grava também as features em JSONL")
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("train-lasso", parents=[common], help="treina LASSO restrito")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--B", type=float, required=True)
    p.add_argument("--eps3", type=float, default=0.02)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--step-rule", choices=[s.value for s in StepRule], default="fixed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train_lasso)

    p = sub.add_parser("shallow-learn", parents=[common], help="aprende observável raso de sondas")
    p.add_argument("--probes", required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--threshold", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_shallow_learn)

    p = sub.add_parser("flipped-solve", parents=[common], help="resolve o sistema do caso invertido")
    p.add_argument("--data", required=True)
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_flipped_solve)

    p = sub.add_parser("clock-verify", parents=[common], help="transferência perfeita no relógio")
    p.add_argument("--gates", type=int, default=4)
    p.add_argument("--work", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--time", type=float, default=None, help="padrão pi")
    p.add_argument("--feynman", action="store_true", help="pesos unitários")
    p.add_argument("--circuit", help="arquivo de circuito em texto")
    p.set_defaults(func=cmd_clock_verify)

    p = sub.add_parser("kitaev-verify", parents=[common], help="estado fundamental de Kitaev")
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--gates", type=int, default=2)
    p.add_argument("--input")
    p.add_argument("--representation", choices=[r.value for r in Representation], default="abstract")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--circuit")
    p.set_defaults(func=cmd_kitaev_verify)

    p = sub.add_parser("evolve", parents=[common], help="evolui uma bitstring sob um operador")
    p.add_argument("--operator", required=True, help="arquivo `dim N` + entradas")
    p.add_argument("--state", required=True, help="bitstring do registrador de trabalho")
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--aux-dim", type=int, default=1)
    p.add_argument("--clock", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("experiment", parents=[common], help="executa um experimento")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sweep", parents=[common], help="varredura em grade")
    p.add_argument("--config", required=True, help="configuração base (chave opcional grid)")
    p.add_argument("--grid", help='JSON, ex. {"n_train": [100, 200]}')
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-suite", parents=[common], help="verificações de invariantes")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--scaling", action="store_true", help="inclui a escala do aprendiz raso")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_suite)

    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Ponto de entrada

    Args:
        argv: Argumentos (padrão sys.argv[1:])

    Returns:
        Código de saída
    """
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as e:
        print(f"erro: {e}", file=sys.stderr)
        return ExitCode.VALIDATION.value

    _configure_logging(args)
    if args.threads is not None and args.threads < 1:
        print("erro: --threads deve ser >= 1", file=sys.stderr)
        return ExitCode.VALIDATION.value
    args.threads = args.threads or get_config()["threads"]

    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    if not args.quiet:
        print(f"config: {json.dumps(resolved, sort_keys=True, default=str)}", file=sys.stderr)

    try:
        return args.func(args)
    except ConvergenceError as e:
        print(f"erro interno: {e}", file=sys.stderr)
        return ExitCode.INTERNAL.value
    except ObsLearnError as e:
        print(f"erro: {e}", file=sys.stderr)
        return ExitCode.VALIDATION.value
    except Exception as e:  # noqa: BLE001
        logger.exception("Falha inesperada")
        print(f"erro interno: {type(e).__name__}: {e}", file=sys.stderr)
        return ExitCode.INTERNAL.value
