"""Multivariant execution toolchain for a WebAssembly text subset."""

__version__ = "0.1.0"
