import sys

from sinkwinch.cli import main

sys.exit(main())
