import sys

from prune_dc.cli import main

sys.exit(main())
