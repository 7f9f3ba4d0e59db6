""" Report models shared by the numerical modules and the CLI """
from .types import UNSET, Unset

__all__ = ("UNSET", "Unset")
