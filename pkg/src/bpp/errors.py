"""Exception hierarchy.

``DataError`` subclasses describe bad input or bad on-disk content;
``StorageIOError`` wraps operating-system failures. The CLI maps the two
families to distinct exit codes.
"""


class BPPError(Exception):
    """Base class for all engine errors."""


class DataError(BPPError):
    pass


class ConfigError(BPPError):
    pass


class StorageIOError(BPPError):
    def __init__(self, path, reason):
        super().__init__(f"I/O failure on {path}: {reason}")
        self.path = str(path)
        self.reason = reason


class MalformedLine(DataError):
    def __init__(self, line_no, text):
        super().__init__(f"line {line_no}: expected two non-negative integers, got {text!r}")
        self.line_no = line_no
        self.text = text


class EmptyGraph(DataError):
    def __init__(self, msg="graph has no edges"):
        super().__init__(msg)


class BudgetTooSmall(ConfigError):
    def __init__(self, vertex, degree, budget):
        super().__init__(f"vertex {vertex} has in-degree {degree} > budget {budget}")
        self.vertex = vertex
        self.degree = degree
        self.budget = budget


class VertexOutOfRange(DataError):
    def __init__(self, vertex, n):
        super().__init__(f"vertex id {vertex} out of range for n={n}")
        self.vertex = vertex
        self.n = n


class VersionMismatch(DataError):
    def __init__(self, found, expected):
        super().__init__(f"manifest version {found!r}, expected {expected!r}")
        self.found = found
        self.expected = expected


class CorruptManifest(DataError):
    def __init__(self, reason):
        super().__init__(f"corrupt manifest: {reason}")
        self.reason = reason


class CorruptShard(DataError):
    def __init__(self, path, reason):
        super().__init__(f"corrupt file {path}: {reason}")
        self.path = str(path)
        self.reason = reason


class OffsetMismatch(DataError):
    def __init__(self, p, q, expected, actual):
        super().__init__(f"block ({p},{q}): manifest length {expected} bytes, subgraph has {actual} bytes")
        self.p = p
        self.q = q


class UpdatePanic(BPPError):
    def __init__(self, vertex, cause):
        super().__init__(f"update function failed on vertex {vertex}: {cause!r}")
        self.vertex = vertex
        self.cause = cause


class NoConvergence(BPPError):
    def __init__(self, iterations, delta):
        super().__init__(f"no convergence after {iterations} iterations (last delta {delta:g})")
        self.iterations = iterations
        self.delta = delta
