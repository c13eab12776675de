"""Example external anonymizer used by the plugin registry tests."""


def shout(text, *, scenario, language, rng):
    return text.upper()
