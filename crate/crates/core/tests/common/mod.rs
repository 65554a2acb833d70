pub mod fd_oracle;
