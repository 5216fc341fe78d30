from .commands import cmd_compare, cmd_fit, cmd_list, cmd_mc, cmd_sample, cmd_verify, cmd_verify_ra
from .documents import CompareSummary, ResultDocument
from .main import build_parser, main

__all__ = [
    "CompareSummary",
    "ResultDocument",
    "build_parser",
    "cmd_compare",
    "cmd_fit",
    "cmd_list",
    "cmd_mc",
    "cmd_sample",
    "cmd_verify",
    "cmd_verify_ra",
    "main",
]
