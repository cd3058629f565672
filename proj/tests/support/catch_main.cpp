// Amalgamated Catch2 translation unit, built once and linked into each suite.
#include <catch2/catch_amalgamated.cpp>
