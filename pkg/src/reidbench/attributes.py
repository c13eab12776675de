"""Canonical attribute vocabulary shared across the benchmark.

Indirect identifiers are demographic attributes read from microdata;
direct identifiers are synthesized per profile. Every module keys on the
canonical ids defined here, in this order.
"""
from __future__ import annotations

INDIRECT_ATTRIBUTES: tuple[str, ...] = (
    "state",
    "sex",
    "date_of_birth",
    "race",
    "marital_status",
    "education",
    "employment",
    "occupation",
    "citizenship",
)

DIRECT_ATTRIBUTES: tuple[str, ...] = (
    "name",
    "ssn",
    "credit_card",
    "phone",
    "address",
    "email",
)

ALL_ATTRIBUTES: tuple[str, ...] = INDIRECT_ATTRIBUTES + DIRECT_ATTRIBUTES

# Human-readable names used inside prompts and error messages.
DISPLAY_NAMES: dict[str, str] = {
    "state": "state of residence",
    "sex": "sex",
    "date_of_birth": "date of birth",
    "race": "race",
    "marital_status": "marital status",
    "education": "educational attainment",
    "employment": "employment status",
    "occupation": "occupation",
    "citizenship": "citizenship status",
    "name": "name",
    "ssn": "social security number",
    "credit_card": "credit card number",
    "phone": "phone number",
    "address": "address",
    "email": "email address",
}

_ORDER = {a: i for i, a in enumerate(ALL_ATTRIBUTES)}


def is_direct(attribute: str) -> bool:
    return attribute in DIRECT_ATTRIBUTES


def is_indirect(attribute: str) -> bool:
    return attribute in INDIRECT_ATTRIBUTES


def canonical_order(attributes) -> list[str]:
    """Return the given attribute ids sorted into canonical declaration order."""
    unknown = [a for a in attributes if a not in _ORDER]
    if unknown:
        raise ValueError(f"unknown attribute ids: {unknown}")
    return sorted(attributes, key=_ORDER.__getitem__)


def display_name(attribute: str) -> str:
    try:
        return DISPLAY_NAMES[attribute]
    except KeyError:
        raise ValueError(f"unknown attribute id: {attribute}") from None
