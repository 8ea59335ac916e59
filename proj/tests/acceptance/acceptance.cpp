#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
// placeholder: acceptance criteria are added after the unit suite is green
