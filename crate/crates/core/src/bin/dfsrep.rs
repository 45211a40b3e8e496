//! `dfsrep`: command-line front-end of the DFS repeater simulator.

fn main() {
    std::process::exit(dfs_repeater::experiment::run(std::env::args_os()));
}
