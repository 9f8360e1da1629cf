"""CLI サブコマンドパッケージ

各モジュールは register(subparsers) と run(args) を提供する
"""
