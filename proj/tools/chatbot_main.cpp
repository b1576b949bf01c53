#include <iostream>

#include "chatbot/cli.hpp"

int main(int argc, char** argv) { return chatbot::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
