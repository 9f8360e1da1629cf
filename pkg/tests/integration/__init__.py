"""統合テスト"""

__all__: list[str] = []
