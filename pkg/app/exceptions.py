"""
Domain errors raised by the self-deployment engine
"""

from typing import List, Optional


class SelfDeploymentError(Exception):
    """Base class for every error the engine raises on bad input"""


class NoServingNodeError(SelfDeploymentError):
    """A user has no serving node in the current association"""


class InvalidDemandError(SelfDeploymentError):
    """A demand was zero or negative"""


class EmptyKnowledgeBaseError(SelfDeploymentError):
    """Retrieval was attempted on a knowledge base with no cases"""


class DimensionMismatchError(SelfDeploymentError):
    """A problem vector does not match the knowledge base dimension"""


class CaseIndexError(SelfDeploymentError):
    """A case index is out of range"""


class KnowledgeBaseFormatError(SelfDeploymentError):
    """A persisted knowledge base file could not be parsed"""


class EmptyInputError(SelfDeploymentError):
    """A metric was requested over an empty sample"""


class InstanceTooLargeError(SelfDeploymentError):
    """The exhaustive oracle would enumerate too many placement sequences"""

    def __init__(self, combinations: int, limit: int):
        self.combinations = combinations
        self.limit = limit
        super().__init__(
            f"Instance too large for exhaustive search: {combinations} combinations (limit {limit})"
        )


class ScenarioParseError(SelfDeploymentError):
    """A scenario file is malformed; carries every problem with its line"""

    def __init__(self, path: str, problems: List[str], line: Optional[int] = None):
        self.path = path
        self.problems = problems
        self.line = line
        detail = '; '.join(problems)
        where = f"{path}:{line}" if line else path
        super().__init__(f"{where}: {detail}")


class InvalidFitnessError(SelfDeploymentError):
    """A fitness value fell outside [0, 1]"""
