"""ユニットテスト用パッケージ"""
