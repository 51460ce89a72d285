import sys

from robinspec.cli import main

sys.exit(main())
