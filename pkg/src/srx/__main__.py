import sys

from srx.cli import main

sys.exit(main())
