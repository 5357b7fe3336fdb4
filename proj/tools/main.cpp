#include "cmrm/lab.hpp"

int main(int argc, char** argv) { return cmrm::lab::cli_main(argc, argv); }
