"""`python -m fuelcon` 用エントリポイント"""

import sys

from fuelcon.main import main

sys.exit(main())
