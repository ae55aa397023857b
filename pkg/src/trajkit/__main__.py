import sys

from trajkit.cli import main

sys.exit(main())
