"""
异常定义模块
"""
from typing import Optional


class ToolkitError(Exception):
    """工具包基础异常"""

    exit_code: int = 2


class ConfigError(ToolkitError, ValueError):
    """配置错误"""

    exit_code = 1


class GraphError(ToolkitError, ValueError):
    """图结构错误（自环、不连通、顶点越界等）"""


class EdgeListParseError(GraphError):
    """边列表文件解析错误"""

    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"第 {line} 行: {message}"
        super().__init__(message)


class SolverError(ToolkitError, RuntimeError):
    """特征值求解错误"""


class SizeLimitError(SolverError):
    """超出稠密求解规模上限"""


class NoConvergenceError(SolverError):
    """迭代未收敛"""

    def __init__(self, message: str, residual: float, iterations: int = 0):
        super().__init__(f"{message} (残差 {residual:.3e}, 迭代 {iterations})")
        self.residual = residual
        self.iterations = iterations


class SupportOverlapError(ToolkitError, ValueError):
    """测试函数支撑集相交"""


class CertificateError(ToolkitError):
    """上界证书构造失败"""


class ConstructionError(ToolkitError):
    """图族构造失败"""


class ProfileError(ToolkitError):
    """宽度/σ 剖面不满足约束"""


class CheckFailure(ToolkitError):
    """数学校验未通过"""


class ArtifactIOError(ToolkitError, OSError):
    """产物读写失败"""

    exit_code = 3
