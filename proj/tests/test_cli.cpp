#include <doctest.h>
TEST_SUITE("cli") {}
