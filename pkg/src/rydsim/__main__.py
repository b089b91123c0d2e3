"""Allow ``python -m rydsim``."""

from rydsim.cli import main

raise SystemExit(main())
