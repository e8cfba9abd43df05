"""
examini command-line entry point
"""

import sys
from typing import Optional, Sequence

from .cli import dispatch


def main(argv: Optional[Sequence[str]] = None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
