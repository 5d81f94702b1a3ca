"""
产物存储模块：图、三角剖分、带根图与 JSON/CSV 报告的读写
"""
import hashlib
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from config import settings
from errors import ArtifactIOError
from family_y import RootedGraph, parse_rooted, to_rooted_text
from graph_core import (
    Graph,
    SphereTriangulation,
    parse_edge_list,
    parse_triangulation,
    to_edge_list_text,
    to_triangulation_text,
)

PathLike = Union[str, Path]


def _to_builtin(value: Any) -> Any:
    """json.dumps 的 default：numpy 标量、数组与路径"""
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return value.as_posix()
    raise TypeError(f"无法序列化类型 {type(value).__name__}")


class ArtifactStore:
    """产物管理器"""

    def __init__(self, root: Optional[PathLike] = None):
        self.root = Path(root if root is not None else settings.OUTPUT_DIR)

    def use(self, root: PathLike) -> "ArtifactStore":
        """切换输出目录"""
        self.root = Path(root)
        return self

    def path(self, name: str) -> Path:
        return self.root / name

    def _write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            # 固定换行符，保证跨平台字节一致
            with open(target, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except OSError as e:
            logger.error(f"写入产物失败 {target}: {e}")
            raise ArtifactIOError(f"写入 {target} 失败: {e}") from e
        logger.debug(f"写入产物 {target}")
        return target

    @staticmethod
    def read_text(path: PathLike) -> str:
        try:
            return Path(path).read_text(encoding="utf-8")
        except OSError as e:
            logger.error(f"读取产物失败 {path}: {e}")
            raise ArtifactIOError(f"读取 {path} 失败: {e}") from e

    # 图产物
    def write_graph(self, name: str, g: Graph) -> Path:
        return self._write_text(name, to_edge_list_text(g))

    def write_triangulation(self, name: str, t: SphereTriangulation) -> Path:
        return self._write_text(name, to_triangulation_text(t))

    def read_triangulation(self, path: PathLike) -> SphereTriangulation:
        return parse_triangulation(self.read_text(path))

    def write_rooted(self, name: str, rg: RootedGraph) -> Path:
        return self._write_text(name, to_rooted_text(rg))

    def load_any(self, path: PathLike) -> Tuple[Graph, Optional[int]]:
        """按内容识别边列表、带根图或三角剖分，返回图与根（若有）"""
        text = self.read_text(path)
        lines = [line for line in text.splitlines() if line.strip()]
        if any(line.startswith("faces ") for line in lines):
            return parse_triangulation(text).graph, None
        if lines and lines[-1].startswith("root "):
            rooted = parse_rooted(text)
            return rooted.graph, rooted.root
        return parse_edge_list(text), None

    # 报告
    def write_json(self, name: str, payload: Dict[str, Any], metadata: bool = True) -> Path:
        """键排序输出；时间戳单独放在 metadata 块"""
        document = dict(payload)
        if metadata:
            document["metadata"] = {
                "app": settings.APP_NAME,
                "version": settings.APP_VERSION,
                "generated_at": datetime.now().isoformat(timespec="seconds"),
            }
        text = json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False, default=_to_builtin)
        return self._write_text(name, text + "\n")

    def load_json(self, path: PathLike) -> Dict[str, Any]:
        try:
            return json.loads(self.read_text(path))
        except json.JSONDecodeError as e:
            raise ArtifactIOError(f"JSON 解析失败 {path}: 第 {e.lineno} 行 {e.msg}") from e

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        return self._write_text(name, frame.to_csv(index=False, float_format="%.12g", lineterminator="\n"))

    @staticmethod
    def digest(path: PathLike) -> str:
        """SHA-256 十六进制摘要"""
        sha = hashlib.sha256()
        try:
            with open(path, "rb") as f:
                for block in iter(lambda: f.read(1 << 16), b""):
                    sha.update(block)
        except OSError as e:
            raise ArtifactIOError(f"读取 {path} 失败: {e}") from e
        return sha.hexdigest()


# 全局产物存储实例
artifact_store = ArtifactStore()
