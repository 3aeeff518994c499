#include <iostream>
int main() {
    std::cout << "[PASS] placeholder\n";
    return 0;
}
