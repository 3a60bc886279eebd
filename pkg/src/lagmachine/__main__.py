import sys

from lagmachine.cli import main

sys.exit(main())
