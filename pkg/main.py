#!/usr/bin/env python3
"""
平面图谱隙工具包命令行入口
"""
import argparse
import asyncio
import functools
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
from loguru import logger
from pydantic import ValidationError

from artifact_store import artifact_store
from config import ExperimentConfig, settings
from cylinder import DEGREE_CAP
from density import describe, distance_density, to_frame, to_rows
from errors import ArtifactIOError, CheckFailure, ConfigError, ConstructionError, ToolkitError
from experiments import FamilyRunner, corpus_graphs, corpus_mixing, corpus_thm1, heuristic_starts
from graph_core import validate_sphere_triangulation
from reports import (
    DensityReport,
    FamilyManifest,
    FamilyMember,
    MemberSidecar,
    MixingReport,
    SpectrumReport,
    VerifyReport,
)
from spectral import lambda1
from sturm import smooth_sigma
from upper_bound import verify_thm1
from walk import mixing_time, tv_frame, verify_mixing_lower, verify_noBC

def setup_logging(level: Optional[str] = None):
    """配置日志"""
    level = level or settings.LOG_LEVEL
    Path(settings.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)

    logger.remove()  # 移除默认处理器

    # 控制台输出（标准错误，标准输出留给结果）
    logger.add(
        sys.stderr,
        level=level,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        colorize=True,
    )

    # 文件输出
    logger.add(
        settings.LOG_FILE,
        level=level,
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
        rotation="1 day",
        retention="30 days",
        compression="zip",
    )


class _ArgumentParser(argparse.ArgumentParser):
    """参数错误按配置错误处理（退出码 1）"""

    def error(self, message):
        raise ConfigError(message)


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"无法解析整数列表: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=_int_list, default=[], help="图族参数 n，逗号分隔，如 8,16,32")
    common.add_argument("--alpha", type=int, default=1, help="细分指数，m = n^alpha (默认: 1)")
    common.add_argument("--eps", type=float, default=settings.DEFAULT_EPS, help="扩张图认证阈值")
    common.add_argument("--seed", type=int, default=None, help="实验种子（gen 必填）")
    common.add_argument("--tol", type=float, default=settings.SOLVER_TOL, help="迭代求解容差")
    common.add_argument("--out", default=settings.OUTPUT_DIR, help=f"输出目录 (默认: {settings.OUTPUT_DIR})")
    common.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json", help="输出格式")
    common.add_argument("--in", dest="inputs", action="append", default=[], help="输入产物，可重复")
    common.add_argument("--root", type=int, default=None, help="距离密度的根（默认取文件中的根或 0）")
    common.add_argument(
        "--policy", choices=["worst_exact", "heuristic"], default="worst_exact", help="混合时间起点策略"
    )
    common.add_argument("--debug", action="store_true", help="启用调试日志")

    parser = _ArgumentParser(description="平面图谱隙极值图族工具包")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    sub.add_parser("gen", parents=[common], help="构造 Y_n 与 X_n 产物")
    sub.add_parser("verify", parents=[common], help="对 X_n 产物与对照图族运行数学校验")
    sub.add_parser("spectrum", parents=[common], help="单图谱隙")
    sub.add_parser("mixing", parents=[common], help="单图混合时间")
    sub.add_parser("density", parents=[common], help="单图距离密度")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            command=args.command,
            n_list=args.n,
            alpha=args.alpha,
            eps=args.eps,
            seed=args.seed,
            tol=args.tol,
            out=Path(args.out),
            fmt=args.fmt,
            inputs=[Path(p) for p in args.inputs],
            root=args.root,
            policy=args.policy,
        )
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise ConfigError(f"配置无效: {messages}") from e


def cmd_gen(config: ExperimentConfig) -> Dict[str, Any]:
    """写出 Y_n（带根边列表）、X_n（三角剖分）、ρ 与 σ 的 CSV 以及 JSON 旁注"""
    store = artifact_store.use(config.out)
    summary = asyncio.run(FamilyRunner().build_family(config.n_list, config.alpha, config.eps, config.seed))
    if summary["errors"]:
        n, error = next(iter(summary["errors"].items()))
        logger.error(f"X_{n} 构造失败: {error}")
        if isinstance(error, ToolkitError):
            raise error
        raise ConstructionError(f"X_{n} 构造失败: {error}") from error

    family = []
    for n, build in sorted(summary["members"].items()):
        y_path = store.write_rooted(f"Y_{n}.g", build.rooted)
        x_path = store.write_triangulation(f"X_{n}.tri", build.triangulation)
        store.write_csv(f"rho_Y_{n}.csv", to_frame(build.rho))
        store.write_csv(f"sigma_Y_{n}.csv", smooth_sigma(build.rho).to_frame())
        digests = {"X": store.digest(x_path), "Y": store.digest(y_path)}
        sidecar = MemberSidecar(
            report=build.report,
            widths=[int(w) for w in build.profile.widths],
            artifacts={"X": x_path.name, "Y": y_path.name},
            digests=digests,
        )
        store.write_json(f"X_{n}.json", sidecar.model_dump())
        family.append(FamilyMember(n=n, X=x_path.name, Y=y_path.name, digests=digests))
        logger.info(f"写出 X_{n}: {x_path} (sha256 {digests['X'][:12]})")

    manifest = FamilyManifest(alpha=config.alpha, eps=config.eps, seed=config.seed, members=family)
    payload = manifest.model_dump()
    store.write_json("family.json", payload)
    return payload


def _load_member(path: Path):
    tri = artifact_store.read_triangulation(path)
    sidecar_path = path.with_suffix(".json")
    if not sidecar_path.exists():
        raise ArtifactIOError(f"缺少旁注文件 {sidecar_path}")
    try:
        sidecar = MemberSidecar.model_validate(artifact_store.load_json(sidecar_path))
    except ValidationError as e:
        raise ArtifactIOError(f"旁注文件格式错误 {sidecar_path}: {e.error_count()} 处") from e
    return tri, sidecar.report


def _band(values: List[float]) -> float:
    return max(values) / min(values) if values and min(values) > 0 else float("inf")


def _certificate_ok(entry: Dict[str, Any]) -> bool:
    certificate = entry.get("certificate")
    if not certificate:
        return True
    # λ1 不超过顶点上界，也不超过两个测试函数中较大的已达成 Rayleigh 商
    slack = 1 + 1e-9
    vertex_bound = certificate.get("vertex_bound")
    rigorous = vertex_bound is None or entry["lambda1"] <= vertex_bound * slack
    quotients = certificate.get("achieved_quotients") or []
    achieved = bool(quotients) and entry["lambda1"] <= max(quotients) * slack
    return bool(certificate["bound_ok"]) and rigorous and achieved


def cmd_verify(config: ExperimentConfig) -> VerifyReport:
    """X_n 图族与对照图族上的全部数学校验，汇总为一个 JSON 报告"""
    store = artifact_store.use(config.out)
    report = VerifyReport()
    members = []
    for path in config.inputs:
        tri, pipeline = _load_member(path)
        members.append((path, tri, pipeline))
    members.sort(key=lambda m: m[2].n)

    # 结构
    for path, tri, pipeline in members:
        validation = validate_sphere_triangulation(tri, DEGREE_CAP)
        report.add(f"structure_X_{pipeline.n}", validation.passed, failures=validation.failures)
    digests = [store.digest(path) for path, _, _ in members]
    report.add("members_distinct", len(set(digests)) == len(digests), digests=digests)

    # 谱隙带宽
    reports = [pipeline for _, _, pipeline in members]
    report.family = [p.model_dump(include={"n", "vol", "diam", "lambda1", "lambda1_Y", "ratio_thm2"}) for p in reports]
    thm2 = [p.ratio_thm2 for p in reports]
    gaps = [p.gap_ratio for p in reports]
    sturm = [p.sturm_ratio for p in reports]
    report.add("thm2_band", _band(thm2) <= settings.THM2_BAND, _band(thm2), values=thm2)
    report.add("gap_ratio_band", _band(gaps) <= settings.GAP_RATIO_BAND, _band(gaps), values=gaps)
    report.add("sturm_band", _band(sturm) <= settings.STURM_BAND, _band(sturm), values=sturm)
    report.add("invariance_threshold", all(p.invariance_ok for p in reports))

    # 上界
    for _, tri, pipeline in members:
        try:
            entry = verify_thm1(tri.graph, DEGREE_CAP).to_dict()
        except ToolkitError as e:
            entry = {"skipped": str(e)}
        entry["label"] = f"X_{pipeline.n}"
        report.thm1.append(entry)

    runner = FamilyRunner()
    corpus = corpus_graphs()
    thm1_corpus = asyncio.run(runner.run_corpus(corpus_thm1, corpus))
    for name, entry in thm1_corpus["members"].items():
        report.thm1.append(dict(entry, label=name))
    for name, error in thm1_corpus["errors"].items():
        report.add(f"thm1_{name}", False, error=str(error))
    for entry in report.thm1:
        if "certificate" in entry and entry["certificate"] and entry["diam"] >= 30:
            report.add(f"thm1_certificate_{entry['label']}", _certificate_ok(entry), entry["lambda1"])
    ratios = [e["ratio"] for e in report.thm1 if "ratio" in e and e["label"].startswith("cycle")]
    report.add("thm1_cycle_ratio_bounded", bool(ratios) and max(ratios) <= settings.THM2_BAND, max(ratios, default=None))

    # 混合时间：X_n 总用锥点加双扫描端点作起点，--policy 只作用于对照图族
    family_mixing = asyncio.run(
        runner.measure_family(
            [(p.n, tri.graph, (p.vertex_count - 2, p.vertex_count - 1)) for _, tri, p in members],
            "heuristic",
        )
    )
    corpus_mix = asyncio.run(runner.run_corpus(functools.partial(corpus_mixing, policy=config.policy), corpus))
    for label, error in list(family_mixing["errors"].items()) + list(corpus_mix["errors"].items()):
        report.add(f"mixing_{label}", False, error=str(error))
    family_rows = []
    for p in reports:
        if p.n in family_mixing["members"]:
            row = dict(family_mixing["members"][p.n], label=f"X_{p.n}", diam=p.diam)
            family_rows.append(row)
    corpus_rows = [dict(row, label=name) for name, row in corpus_mix["members"].items()]
    report.mixing = family_rows + corpus_rows
    c_values = [row["C_fit"] for row in report.mixing]
    report.add("mixing_sandwich", bool(c_values) and max(c_values) <= settings.MIXING_C_MAX, max(c_values, default=None))

    # 直径-混合时间统计量
    cycles = [row for row in corpus_rows if row["label"].startswith("cycle")]
    if len(cycles) >= 3:
        report.no_bc_control = verify_noBC(cycles)
    if len(family_rows) >= 3:
        report.no_bc = verify_noBC(family_rows)
        report.mixing_lower = verify_mixing_lower(family_rows)
        report.add("noBC_bounded", report.no_bc["bounded"], report.no_bc["band"])
        if report.no_bc_control:
            report.add(
                "noBC_contrast",
                report.no_bc_control["growth"] > report.no_bc["growth"],
                report.no_bc_control["growth"] / report.no_bc["growth"],
            )
    else:
        report.no_bc = {"skipped": f"族成员 {len(family_rows)} < 3"}

    store.write_json("verify_report.json", report.model_dump())
    failed = [check.name for check in report.checks if not check.passed]
    logger.info(f"校验完成: {len(report.checks) - len(failed)}/{len(report.checks)} 通过")
    if failed:
        raise CheckFailure(f"校验未通过: {failed}")
    return report


def _single_input(config: ExperimentConfig):
    path = config.inputs[0]
    graph, root = artifact_store.load_any(path)
    return path, graph, root


def _emit(config: ExperimentConfig, stem: str, payload: Dict[str, Any], frame: pd.DataFrame) -> Path:
    store = artifact_store.use(config.out)
    if config.fmt == "csv":
        return store.write_csv(f"{stem}.csv", frame)
    return store.write_json(f"{stem}.json", payload)


def cmd_spectrum(config: ExperimentConfig) -> Dict[str, Any]:
    path, graph, _ = _single_input(config)
    result = lambda1(graph, tol=config.tol, seed=config.seed or 0)
    payload = SpectrumReport(
        input=path.name, vertex_count=graph.vertex_count, vol=graph.vol, **result.to_record()
    ).model_dump()
    _emit(config, f"{path.stem}_spectrum", payload, pd.DataFrame([payload]))
    logger.info(f"{path.name}: λ1 = {result.lambda1:.12g} ({result.method})")
    return payload


def cmd_mixing(config: ExperimentConfig) -> Dict[str, Any]:
    path, graph, _ = _single_input(config)
    starts = heuristic_starts(graph) if config.policy == "heuristic" else None
    result = mixing_time(graph, config.policy, starts)
    payload = MixingReport(
        input=path.name,
        tau=result.tau,
        start_policy=result.start_policy,
        starts=[int(s) for s in result.starts],
        tv_curve=result.tv_curve,
    ).model_dump()
    _emit(config, f"{path.stem}_mixing", payload, tv_frame(result))
    logger.info(f"{path.name}: τ = {result.tau} ({result.start_policy})")
    return payload


def cmd_density(config: ExperimentConfig) -> Dict[str, Any]:
    path, graph, file_root = _single_input(config)
    root = config.root if config.root is not None else (file_root or 0)
    rho = distance_density(graph, root)
    payload = DensityReport(
        input=path.name, root=root, edge_count=graph.edge_count, **describe(rho), rows=to_rows(rho)
    ).model_dump()
    _emit(config, f"{path.stem}_density", payload, to_frame(rho))
    logger.info(f"{path.name}: ∫ρ = {rho.integral()} = E = {graph.edge_count}")
    return payload


HANDLERS: Dict[str, Callable[[ExperimentConfig], Any]] = {
    "gen": cmd_gen,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "mixing": cmd_mixing,
    "density": cmd_density,
}


def run(argv: Optional[List[str]] = None) -> int:
    """执行命令并返回退出码：0 成功，1 配置，2 数学校验失败，3 I/O"""
    try:
        args = build_parser().parse_args(argv)
        setup_logging("DEBUG" if args.debug else None)
        config = load_config(args)
        logger.info(f"{settings.APP_NAME} v{settings.APP_VERSION}: {config.command}")
        HANDLERS[config.command](config)
        return 0
    except ToolkitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"错误: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O 错误: {e}")
        print(f"错误: {e}", file=sys.stderr)
        return 3


def main():
    """主函数"""
    sys.exit(run())


if __name__ == "__main__":
    main()
