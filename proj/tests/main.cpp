// Copyright (c) 2026 the PRN authors
// Licensed under the MIT license.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
