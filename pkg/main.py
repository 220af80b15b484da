#!/usr/bin/env python3
"""
magsim 启动脚本
未安装包时可直接运行：python main.py figure4 --config configs/figure4.env
"""

import sys

from magsim.cli import main

if __name__ == "__main__":
    sys.exit(main())
