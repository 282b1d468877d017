# treeharm – experiment runner package
