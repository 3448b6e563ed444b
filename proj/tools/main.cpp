#include "cli_app.hpp"

int main(int argc, char** argv) { return controlburn::cli::run(argc, argv); }
