# Тесты для проекта Web_parsing_to_JSON_Serbia_fiskal
