#include <cstdio>
int main() { std::puts("hglab: placeholder"); return 0; }
