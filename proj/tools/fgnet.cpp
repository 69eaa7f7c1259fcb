// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>

int main() {
  std::puts("fgnet cli placeholder");
  return 0;
}
