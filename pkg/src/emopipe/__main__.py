import sys

from emopipe.cli import main

sys.exit(main())
