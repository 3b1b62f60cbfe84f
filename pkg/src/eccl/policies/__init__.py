from .features import (
    D, FEATURE_NAMES, SCHEMA_VERSION, PolicyContext, as_feature_vector, feature_rows, feature_table,
    features, legal_actions,
)
from .scripted import ScriptedExecutor, ScriptedExplorer
from .softmax import (
    Decision, PolicyParameters, RandomPolicy, SoftmaxPolicy, action_distribution, sample_action,
)
from .view import AgentView


def scripted_explorer():
    return ScriptedExplorer()


def scripted_executor():
    return ScriptedExecutor()


__all__ = [
    "AgentView", "D", "Decision", "FEATURE_NAMES", "PolicyContext", "PolicyParameters",
    "RandomPolicy", "SCHEMA_VERSION", "ScriptedExecutor", "ScriptedExplorer", "SoftmaxPolicy",
    "action_distribution", "as_feature_vector", "feature_rows", "feature_table", "features",
    "legal_actions", "sample_action", "scripted_executor", "scripted_explorer",
]
