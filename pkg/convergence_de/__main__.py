import sys

from convergence_de.cli import main

sys.exit(main())
