# Copyright (c) 2026 maglev_twin contributors
#
# SPDX-License-Identifier: MIT
