#include "experiment.hpp"

int main(int argc, char** argv) { return calderon::cli::main_entry(argc, argv); }
