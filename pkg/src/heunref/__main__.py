import sys

from heunref.cli import main

sys.exit(main())
