"""CLI パッケージ

argparse のサブコマンドとして solve などのコマンドを提供する
"""
