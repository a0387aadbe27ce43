// Compiles the amalgamated Catch2 implementation (with its default main)
// once, shared by every test target.
#include <catch2/catch_amalgamated.cpp>
