"""Run weighted-template-matcher with ``python -m weighted_template_matcher``."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
