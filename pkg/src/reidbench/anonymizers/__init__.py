"""Anonymization tool registry.

A tool is a callable (text, scenario, language, rng) -> text. Built-in
types cover the identity baseline, the pattern baseline, the three
redaction-prompt variants, summarization, entity masking and the two
perturbation mechanisms; `plugin` imports an external callable by
dotted path so third-party tools slot in without code changes here.
"""
from __future__ import annotations

import importlib
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .llm import AnonymizerParseError, entity_mask_llm, redact_llm, summarize_llm
from .pattern import load_pattern_rules, pattern_anonymize
from .perturb import EmbeddingSpace, madlib, tem


class AnonymizerFn(Protocol):
    def __call__(self, text: str, *, scenario: str, language: str, rng: np.random.Generator) -> str: ...


@dataclass(frozen=True)
class AnonymizerOutput:
    """One tool's output for one entry, with run identity and cost counters."""

    entry_id: str
    tool_id: str
    text: str
    fingerprint: str
    latency_s: float
    prompt_tokens: int
    completion_tokens: int


_FACTORIES: dict[str, Callable] = {}


def register_tool_type(name: str):
    def wrap(factory: Callable) -> Callable:
        if name in _FACTORIES:
            raise ValueError(f"tool type {name!r} already registered")
        _FACTORIES[name] = factory
        return factory

    return wrap


def tool_types() -> tuple[str, ...]:
    return tuple(sorted(_FACTORIES))


def build_tool(config: dict, client=None) -> AnonymizerFn:
    """Instantiate one tool from its config mapping ({type: ..., ...})."""
    kind = config.get("type")
    if kind not in _FACTORIES:
        raise ValueError(f"unknown tool type {kind!r} (known: {', '.join(tool_types())})")
    return _FACTORIES[kind](config, client)


@register_tool_type("identity")
def _identity(config: dict, client) -> AnonymizerFn:
    def run(text, *, scenario, language, rng):
        return text

    return run


@register_tool_type("pattern")
def _pattern(config: dict, client) -> AnonymizerFn:
    rules = load_pattern_rules(config.get("rules"))

    def run(text, *, scenario, language, rng):
        return pattern_anonymize(text, rules)

    return run


@register_tool_type("llm_redact")
def _llm_redact(config: dict, client) -> AnonymizerFn:
    variant = config.get("variant", "plain")

    def run(text, *, scenario, language, rng):
        return redact_llm(client, text, variant=variant, language=language)

    return run


@register_tool_type("llm_summary")
def _llm_summary(config: dict, client) -> AnonymizerFn:
    attempts = int(config.get("max_attempts", 3))

    def run(text, *, scenario, language, rng):
        return summarize_llm(client, text, scenario, max_attempts=attempts)

    return run


@register_tool_type("llm_entities")
def _llm_entities(config: dict, client) -> AnonymizerFn:
    mask = str(config.get("mask", "XXX"))

    def run(text, *, scenario, language, rng):
        return entity_mask_llm(client, text, scenario, mask=mask)

    return run


def _load_space(config: dict) -> EmbeddingSpace:
    path = config.get("embeddings")
    if not path:
        raise ValueError(f"tool {config.get('id')!r} needs an 'embeddings' file path")
    return EmbeddingSpace.load(path)


@register_tool_type("madlib")
def _madlib(config: dict, client) -> AnonymizerFn:
    space = _load_space(config)
    epsilon = float(config.get("epsilon", 11.0))

    def run(text, *, scenario, language, rng):
        return madlib(text, space, epsilon, rng)

    return run


@register_tool_type("tem")
def _tem(config: dict, client) -> AnonymizerFn:
    space = _load_space(config)
    epsilon = float(config.get("epsilon", 11.0))
    gamma = float(config.get("gamma", 1.0))

    def run(text, *, scenario, language, rng):
        return tem(text, space, epsilon, gamma, rng)

    return run


@register_tool_type("plugin")
def _plugin(config: dict, client) -> AnonymizerFn:
    entry_point = config.get("entry_point", "")
    if ":" not in entry_point:
        raise ValueError(f"plugin tool {config.get('id')!r} needs entry_point 'module:callable'")
    module_name, attr = entry_point.split(":", 1)
    fn = getattr(importlib.import_module(module_name), attr)
    params = config.get("params", {})

    def run(text, *, scenario, language, rng):
        return fn(text, scenario=scenario, language=language, rng=rng, **params)

    return run


__all__ = [
    "AnonymizerFn",
    "AnonymizerOutput",
    "AnonymizerParseError",
    "EmbeddingSpace",
    "build_tool",
    "entity_mask_llm",
    "load_pattern_rules",
    "madlib",
    "pattern_anonymize",
    "redact_llm",
    "register_tool_type",
    "summarize_llm",
    "tem",
    "tool_types",
]
