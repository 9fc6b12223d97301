"""Skill layer: wire protocol, remote leaves and a simulated skill server."""

from .protocol import SkillMessage, decode, encode

__all__ = ["SkillMessage", "encode", "decode"]
