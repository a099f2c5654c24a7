import sys

from szego_lab.cli import main

sys.exit(main())
