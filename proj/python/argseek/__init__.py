"""Python interface to the argseek core library."""

from ._argseek import (
    ContractError,
    Dataset,
    DialogueEnv,
    Error,
    Explainer,
    IoError,
    Network,
    ParseError,
    ResourceError,
    Rule,
    State,
    ValidationError,
    brute_force_cost,
    evaluate,
    generate,
    load_dataset,
    load_network,
    parse_rule,
    train,
)

__all__ = [
    "ContractError",
    "Dataset",
    "DialogueEnv",
    "Error",
    "Explainer",
    "IoError",
    "Network",
    "ParseError",
    "ResourceError",
    "Rule",
    "State",
    "ValidationError",
    "brute_force_cost",
    "evaluate",
    "generate",
    "load_dataset",
    "load_network",
    "parse_rule",
    "train",
]
