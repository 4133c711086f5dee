// SPDX-License-Identifier: Apache-2.0

mod cli;

fn main() {
    std::process::exit(cli::main());
}
