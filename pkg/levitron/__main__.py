import sys

from levitron.app import main

sys.exit(main())
