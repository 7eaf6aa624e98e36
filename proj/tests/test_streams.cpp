#include <doctest.h>
TEST_SUITE("streams") {}
