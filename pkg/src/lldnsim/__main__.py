import sys

from lldnsim.cli import main

sys.exit(main())
