"""
报告模型（JSON 输出）
"""
from typing import Any, Dict, List, Optional, Tuple, Type

from pydantic import BaseModel, Field


class SpectralRecord(BaseModel):
    lambda1: float
    residual: float
    method: str
    iterations: int


class PipelineReport(BaseModel):
    """X_n 构造流水线报告"""

    n: int
    alpha: int
    seed: int
    vol: int
    diam: int
    lambda1: float
    lambda1_Y: float
    ratio_thm2: float
    degree_max: int
    validator: Dict[str, Any]
    vertex_count: int
    R: int
    max_width: int
    vol_Y: int
    diam_Y: int
    gap_ratio: float
    vol_below_diam_sq: bool
    lambda1_cylinder: float
    lambda1_sturm: float
    sturm_ratio: float
    invariance_ok: bool
    sigma_band: float
    provenance: Dict[str, Any]
    spectral: Dict[str, SpectralRecord]
    tau: Optional[int] = None
    mixing: Optional[Dict[str, Any]] = None


class CheckRecord(BaseModel):
    """单项数学校验"""

    name: str
    passed: bool
    value: Optional[float] = None
    detail: Dict[str, Any] = Field(default_factory=dict)


class VerifyReport(BaseModel):
    """verify 命令的汇总报告"""

    checks: List[CheckRecord] = Field(default_factory=list)
    thm1: List[Dict[str, Any]] = Field(default_factory=list)
    family: List[Dict[str, Any]] = Field(default_factory=list)
    mixing: List[Dict[str, Any]] = Field(default_factory=list)
    no_bc: Dict[str, Any] = Field(default_factory=dict)
    no_bc_control: Dict[str, Any] = Field(default_factory=dict)
    mixing_lower: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, passed: bool, value: Optional[float] = None, **detail: Any) -> CheckRecord:
        record = CheckRecord(name=name, passed=bool(passed), value=value, detail=detail)
        self.checks.append(record)
        return record


class MemberSidecar(BaseModel):
    """X_n.json：流水线报告、宽度剖面与产物摘要"""

    report: PipelineReport
    widths: List[int]
    artifacts: Dict[str, str]
    digests: Dict[str, str]


class FamilyMember(BaseModel):
    n: int
    X: str
    Y: str
    digests: Dict[str, str]


class FamilyManifest(BaseModel):
    """gen 命令写出的 family.json"""

    alpha: int
    eps: float
    seed: int
    members: List[FamilyMember]


class SpectrumReport(SpectralRecord):
    input: str
    vertex_count: int
    vol: int


class MixingReport(BaseModel):
    input: str
    tau: int
    start_policy: str
    starts: List[int]
    tv_curve: List[Tuple[int, float]]


class DensityReport(BaseModel):
    input: str
    root: int
    edge_count: int
    diam_p: float
    integral: int
    max_rho: int
    critical_values: int
    bad_critical_values: int
    rows: List[Tuple[float, float, int]]


# schemas/ 下发布的模式文件
PUBLISHED_SCHEMAS: Dict[str, Type[BaseModel]] = {
    "pipeline_report.schema.json": PipelineReport,
    "member_sidecar.schema.json": MemberSidecar,
    "family.schema.json": FamilyManifest,
    "verify_report.schema.json": VerifyReport,
    "spectrum.schema.json": SpectrumReport,
    "mixing.schema.json": MixingReport,
    "density.schema.json": DensityReport,
}
