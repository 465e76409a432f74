# Командная строка pgk
