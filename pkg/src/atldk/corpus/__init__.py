"""Bundled example arenas.

The Alice and Bob arena models two parents who must coordinate, under partial
observation, to pick up their child and do the shopping: a morning task
assignment is drawn nondeterministically and each parent only ever sees their
own task, so any winning joint plan has to exchange information through the
actions themselves.
"""

from importlib import resources

from ..arena import load_arena

ALICEBOB = "alicebob.json"


def alicebob_path():
    """Filesystem path of the bundled Alice and Bob arena document."""
    return str(resources.files(__package__) / ALICEBOB)


def load_alicebob():
    """The bundled Alice and Bob arena, loaded and validated."""
    text = (resources.files(__package__) / ALICEBOB).read_text("utf-8")
    return load_arena(text)
