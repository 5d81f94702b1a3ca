"""
平面图谱隙工具包配置文件
"""
import zlib
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """应用配置"""

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # 应用基础配置
    APP_NAME: str = "planar-gap"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # 谱求解配置
    DENSE_LIMIT: int = 2000  # 稠密求解顶点上限，可用环境变量 DENSE_LIMIT 覆盖
    SOLVER_TOL: float = 1e-9
    ITERATION_CAP_FACTOR: int = 50  # 迭代上限 = 系数 * sqrt(V)

    # 图族构造配置
    DEFAULT_EPS: float = 0.1
    REGULAR_RESAMPLE_CAP: int = 1000
    EXPANDER_RESAMPLE_CAP: int = 50
    GOOD_JUMP: int = 3  # 好临界值的跳跃上限

    # 随机游走配置
    MIXING_EPS: float = 0.25
    LAZINESS: float = 0.5
    WALK_STEP_CAP: int = 2_000_000

    # Sturm 求解配置
    STURM_STEP: float = 1.0 / 64
    MOLLIFIER_WIDTH: float = 0.5

    # 验收带宽配置
    THM2_BAND: float = 50.0
    GAP_RATIO_BAND: float = 25.0
    MIXING_C_MAX: float = 100.0
    NOBC_BAND: float = 10.0
    STURM_BAND: float = 25.0

    # 并发配置
    MAX_WORKERS: int = 4

    # 输出配置
    OUTPUT_DIR: str = "artifacts"

    # 日志配置
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = "logs/planar_gap.log"


# 对照图族（verify 命令使用）
CORPUS: Dict[str, Dict[str, List[int]]] = {
    "cycle": {"sizes": [16, 32, 64, 128]},
    "path": {"sizes": [16, 32, 64]},
    "complete": {"sizes": [8, 16]},
    "grid": {"sizes": [6, 10, 16]},
}

# 随机子流名称
SUBSTREAMS: Tuple[str, ...] = ("expander", "solver")


def substream(seed: int, name: str) -> np.random.Generator:
    """由实验种子派生命名随机子流"""
    if name not in SUBSTREAMS:
        raise ValueError(f"未知随机子流: {name}")
    sequence = np.random.SeedSequence([int(seed), zlib.crc32(name.encode("ascii"))])
    return np.random.default_rng(sequence)


class ExperimentConfig(BaseModel):
    """命令行实验配置"""

    command: str
    n_list: List[int] = Field(default_factory=list)
    alpha: int = Field(default=1, ge=0, le=4)
    eps: float = Field(default=0.1, gt=0.0, le=10.0)
    seed: Optional[int] = Field(default=None, ge=0)
    tol: float = Field(default=1e-9, gt=0.0, lt=1e-2)
    out: Path = Path("artifacts")
    fmt: str = "json"
    inputs: List[Path] = Field(default_factory=list)
    root: Optional[int] = Field(default=None, ge=0)
    policy: str = "worst_exact"

    @field_validator("n_list")
    @classmethod
    def _check_n(cls, value: List[int]) -> List[int]:
        for n in value:
            if n < 4 or n % 2:
                raise ValueError(f"n 必须为不小于 4 的偶数: {n}")
        return sorted(set(value))

    @field_validator("fmt")
    @classmethod
    def _check_fmt(cls, value: str) -> str:
        if value not in ("json", "csv"):
            raise ValueError(f"不支持的输出格式: {value}")
        return value

    @field_validator("policy")
    @classmethod
    def _check_policy(cls, value: str) -> str:
        if value not in ("worst_exact", "heuristic"):
            raise ValueError(f"不支持的起点策略: {value}")
        return value

    @model_validator(mode="after")
    def _check_command(self) -> "ExperimentConfig":
        if self.command == "gen":
            if self.seed is None:
                raise ValueError("gen 命令必须指定 --seed")
            if not self.n_list:
                raise ValueError("gen 命令必须指定 --n")
        if self.command == "verify" and not self.inputs:
            raise ValueError("verify 命令需要至少一个 X_n 产物 (--in)")
        if self.command in ("spectrum", "mixing", "density") and len(self.inputs) != 1:
            raise ValueError(f"{self.command} 命令需要恰好一个 --in 文件")
        return self


# 创建配置实例
settings = Settings()
