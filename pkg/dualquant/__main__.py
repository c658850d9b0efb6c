import sys

from dualquant.harness.cli import main

sys.exit(main())
