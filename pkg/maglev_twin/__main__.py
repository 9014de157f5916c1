# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT

"""
Entry point for ``python -m maglev_twin``.
"""

import sys

from maglev_twin.CommandLine import main

sys.exit(main())
